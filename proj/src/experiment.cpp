#include "qoe/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "qoe/kernels/exp_variates.hpp"

namespace qoe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool known_family(const std::string& f) {
    return f == "offline" || f == "safe" || f == "risky" || f == "free-only" || f == "both-always";
}

std::uint64_t row_seed(std::uint64_t seed, std::size_t d_index, std::size_t policy_index) {
    return kernels::counter_hash(kernels::counter_hash(seed, d_index), policy_index);
}

} // namespace

void ExperimentConfig::validate() const {
    (void)rates();
    QoeTarget{0.0, eps}.validate();
    if (policies.empty()) throw DomainError("experiment: the policy set is empty");
    for (const auto& p : policies) {
        if (!known_family(p)) throw DomainError("experiment: unknown policy '" + p + "'");
    }
    if (!(d_step > 0.0)) throw DomainError("experiment: d_step must be > 0");
    if (!(d_min >= 0.0) || !(d_max >= d_min)) throw DomainError("experiment: need 0 <= d_min <= d_max");
    if (trials < 1) throw DomainError("experiment: trials must be >= 1");
    if (!(truncation_tol > 0.0 && truncation_tol < 1.0)) {
        throw DomainError("experiment: truncation_tol must lie in (0, 1)");
    }
    if (file_size && !(*file_size > 0.0)) throw DomainError("experiment: file_size must be > 0");
}

std::vector<double> d_grid(double d_min, double d_max, double step) {
    if (!(step > 0.0)) throw DomainError("d_grid: step must be > 0");
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor((d_max - d_min) / step + 1e-9)) + 1;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) grid.push_back(d_min + static_cast<double>(i) * step);
    return grid;
}

std::vector<Fig1Row> fig1_rows(const ExperimentConfig& cfg) {
    cfg.validate();
    const ServerRates rates = cfg.rates();
    const DecayExponents exps = DecayExponents::from(rates);
    std::vector<Fig1Row> rows;
    for (double d : d_grid(cfg.d_min, cfg.d_max, cfg.d_step)) {
        Fig1Row row{d, kInf, d >= exps.d_bar(cfg.eps) ? 1 : 0};
        try {
            row.t_star = risky_threshold({d, cfg.eps}, rates);
        } catch (const InfeasibleTarget&) {
            row.t_star = kInf;
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<Fig2Row> fig2_rows(const ExperimentConfig& cfg) {
    cfg.validate();
    const ServerRates rates = cfg.rates();
    const std::vector<double> grid = d_grid(cfg.d_min, cfg.d_max, cfg.d_step);
    std::vector<Fig2Row> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const QoeTarget target{grid[i], cfg.eps};
        for (std::size_t j = 0; j < cfg.policies.size(); ++j) {
            const std::string& family = cfg.policies[j];
            Fig2Row row{target.d, family, kInf, false, false, {}};
            try {
                const CostReport cost = designed_cost(family, target, rates);
                row.analytic_cost_time = cost.expected_cost_time;
                row.analytic_is_bound = cost.is_bound;
            } catch (const InfeasibleTarget&) {
                row.analytic_cost_time = kInf;
            }
            std::optional<PolicySpec> spec;
            try {
                spec = designed_policy(family, target, rates);
            } catch (const InfeasibleTarget&) {
                spec.reset();
            }
            if (spec) {
                SimConfig sim{rates, target, *spec, cfg.file_size, cfg.trials,
                              row_seed(cfg.seed, i, j), cfg.truncation_tol, cfg.threads};
                if (sim.file_size && !(*sim.file_size > target.d)) {
                    throw DomainError("experiment: file_size must exceed every D on the grid");
                }
                row.mc = estimate(sim);
                row.simulated = true;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string format_number(double v) {
    if (std::isnan(v)) throw NumericError("refusing to write NaN");
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_fig1_csv(std::ostream& os, const std::vector<Fig1Row>& rows) {
    os << kFig1Header << '\n';
    for (const auto& r : rows) {
        os << format_number(r.d) << ',' << format_number(r.t_star) << ',' << r.d_bar_flag << '\n';
    }
}

void write_fig2_csv(std::ostream& os, const std::vector<Fig2Row>& rows) {
    os << kFig2Header << '\n';
    for (const auto& r : rows) {
        os << format_number(r.d) << ',' << r.policy << ',' << format_number(r.analytic_cost_time) << ','
           << (r.analytic_is_bound ? 1 : 0) << ',';
        if (r.simulated) {
            os << format_number(r.mc.cost_time.point) << ',' << format_number(r.mc.cost_time.lo) << ','
               << format_number(r.mc.cost_time.hi) << ',' << format_number(r.mc.p_hat.point) << ','
               << format_number(r.mc.p_hat.lo) << ',' << format_number(r.mc.p_hat.hi) << ','
               << format_number(r.mc.costly_packets.point);
        } else {
            os << "inf,inf,inf,inf,inf,inf,inf";
        }
        os << '\n';
    }
}

void write_hjb_csv(std::ostream& os, const std::vector<HjbResidualReport>& rows) {
    os << kHjbHeader << '\n';
    for (const auto& r : rows) {
        os << format_number(r.point.x) << ',' << format_number(r.point.p) << ',' << format_number(r.lhs) << ','
           << format_number(r.rhs) << ',' << format_number(r.residual) << ',' << r.argmin_u << ','
           << (r.in_exact_zone ? 1 : 0) << '\n';
    }
}

void write_sweep_metadata(const std::filesystem::path& csv_path, const ExperimentConfig& cfg,
                          const std::string& figure) {
    const ServerRates rates = cfg.rates();
    const double file_size = cfg.file_size ? *cfg.file_size : truncation_horizon(rates.free(), cfg.truncation_tol);
    nlohmann::ordered_json meta;
    meta["figure"] = figure;
    meta["csv"] = csv_path.filename().string();
    meta["r0"] = cfg.r0;
    meta["rc"] = cfg.rc;
    meta["eps"] = cfg.eps;
    meta["d_min"] = cfg.d_min;
    meta["d_max"] = cfg.d_max;
    meta["d_step"] = cfg.d_step;
    meta["policies"] = cfg.policies;
    meta["trials"] = cfg.trials;
    meta["seed"] = cfg.seed;
    meta["file_size"] = cfg.file_size ? nlohmann::ordered_json(*cfg.file_size) : nlohmann::ordered_json("auto");
    meta["resolved_file_size"] = file_size;
    meta["truncation_tol"] = cfg.truncation_tol;
    meta["truncation_bias_bound"] = truncation_gap(rates.free(), file_size);
    meta["rng"] = "splitmix64 counter streams keyed by (seed, D index, policy index, trial)";

    std::filesystem::path meta_path = csv_path;
    meta_path += ".meta.json";
    std::ofstream os(meta_path);
    if (!os) throw std::runtime_error("cannot write " + meta_path.string());
    os << meta.dump(2) << '\n';
}

} // namespace qoe
