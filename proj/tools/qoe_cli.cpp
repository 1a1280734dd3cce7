// qoe: thresholds, simulations, sweeps and HJB checks from the command line.
//
// Exit codes: 0 ok, 1 usage or parse error, 2 infeasible target,
// 3 numeric or domain error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qoe/config.hpp"
#include "qoe/errors.hpp"
#include "qoe/experiment.hpp"
#include "qoe/hjb.hpp"
#include "qoe/kernels/exp_variates.hpp"

namespace {

using namespace qoe;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

void kv(const std::string& key, const std::string& value) { std::cout << key << '=' << value << '\n'; }
void kv(const std::string& key, double value) { kv(key, num(value)); }

std::string lower_region(Region r) {
    std::string s(to_string(r));
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

const char* parameter_key(const PolicySpec& spec) {
    struct V {
        const char* operator()(const policies::FreeOnly&) const { return nullptr; }
        const char* operator()(const policies::BothAlways&) const { return nullptr; }
        const char* operator()(const policies::Offline&) const { return "switch_time"; }
        const char* operator()(const policies::Safe&) const { return "level"; }
        const char* operator()(const policies::Risky&) const { return "threshold"; }
    };
    return std::visit(V{}, spec);
}

double parameter_value(const PolicySpec& spec) {
    struct V {
        double operator()(const policies::FreeOnly&) const { return 0.0; }
        double operator()(const policies::BothAlways&) const { return 0.0; }
        double operator()(const policies::Offline& p) const { return p.switch_time; }
        double operator()(const policies::Safe& p) const { return p.level; }
        double operator()(const policies::Risky& p) const { return p.threshold; }
    };
    return std::visit(V{}, spec);
}

PolicySpec with_parameter(const PolicySpec& spec, double value) {
    struct V {
        double v;
        PolicySpec operator()(const policies::FreeOnly& p) const { return p; }
        PolicySpec operator()(const policies::BothAlways& p) const { return p; }
        PolicySpec operator()(const policies::Offline&) const { return policies::Offline{v}; }
        PolicySpec operator()(const policies::Safe&) const { return policies::Safe{v}; }
        PolicySpec operator()(const policies::Risky&) const { return policies::Risky{v}; }
    };
    return std::visit(V{value}, spec);
}

PolicySpec policy_skeleton(const std::string& family) {
    if (family == "offline") return policies::Offline{0.0};
    if (family == "safe") return policies::Safe{0.0};
    if (family == "risky") return policies::Risky{0.0};
    if (family == "free-only") return policies::FreeOnly{};
    if (family == "both-always") return policies::BothAlways{};
    throw UsageError("unknown policy '" + family + "'");
}

const std::vector<std::string> kFamilies{"offline", "safe", "risky", "free-only", "both-always"};

// ---------------------------------------------------------------- roots

struct RootsArgs {
    std::optional<double> rate, r0, rc, eps;
};

int cmd_roots(const RootsArgs& a) {
    if (a.rate) {
        if (a.r0 || a.rc) throw UsageError("roots: give either --rate or --r0/--rc, not both");
        const double rbar = largest_root(*a.rate);
        kv("rate", *a.rate);
        kv("rbar", rbar);
        return kExitOk;
    }
    if (!a.r0 || !a.rc) throw UsageError("roots: need --rate, or both --r0 and --rc");
    const ServerRates rates(*a.r0, *a.rc);
    const auto e = DecayExponents::from(rates);
    kv("r0", rates.free());
    kv("r1", rates.both());
    kv("alpha0", e.alpha0);
    kv("alpha1", e.alpha1);
    kv("beta", e.beta);
    kv("theta", e.theta);
    if (a.eps) {
        QoeTarget{0.0, *a.eps}.validate();
        kv("d_bar", e.d_bar(*a.eps));
    }
    return kExitOk;
}

// ---------------------------------------------------------------- region

struct TargetArgs {
    double d = 20.0;
    double eps = 1e-3;
    double r0 = 1.05;
    double rc = 0.15;
};

int cmd_region(const TargetArgs& a) {
    const ServerRates rates(a.r0, a.rc);
    const QoeTarget target{a.d, a.eps};
    target.validate();
    const auto cls = classify(target, rates);
    kv("region", lower_region(cls.region));
    kv("d_min", cls.d_min);
    kv("d_max", cls.d_max);
    kv("d_bar", DecayExponents::from(rates).d_bar(a.eps));
    return kExitOk;
}

// ---------------------------------------------------------------- threshold

void print_design(const std::string& family, const QoeTarget& target, const ServerRates& rates,
                  const PolicySpec& spec) {
    kv("policy", family);
    kv("region", lower_region(classify(target, rates).region));
    if (const char* key = parameter_key(spec)) kv(key, parameter_value(spec));
    const CostReport cost = designed_cost(family, target, rates);
    kv("expected_cost_time", cost.expected_cost_time);
    kv("is_bound", cost.is_bound ? "1" : "0");
    kv("costly_packets", cost.costly_packets_equiv);
    kv("overshoot_band", cost.overshoot_band);
}

int cmd_threshold(const TargetArgs& a, const std::string& family) {
    const ServerRates rates(a.r0, a.rc);
    const QoeTarget target{a.d, a.eps};
    target.validate();
    policy_skeleton(family);
    const PolicySpec spec = designed_policy(family, target, rates);
    print_design(family, target, rates, spec);
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    TargetArgs target;
    std::string policy = "risky";
    std::optional<double> param;
    std::uint64_t trials = kDefaultTrials;
    std::uint64_t seed = 1;
    std::string file_size = "auto";
    double truncation_tol = kDefaultTruncationTol;
    unsigned threads = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    const ServerRates rates(a.target.r0, a.target.rc);
    const QoeTarget target{a.target.d, a.target.eps};
    target.validate();
    PolicySpec spec = policy_skeleton(a.policy);
    if (a.param) {
        if (!parameter_key(spec)) throw UsageError("simulate: --param does not apply to " + a.policy);
        spec = with_parameter(spec, *a.param);
    } else {
        spec = designed_policy(a.policy, target, rates);
    }
    ExperimentConfig parsed;
    apply_config_value(parsed, "file_size", a.file_size);

    SimConfig sim{rates, target, spec, parsed.file_size, a.trials, a.seed, a.truncation_tol, a.threads};
    sim.validate();
    const McEstimate mc = estimate(sim);

    kv("policy", a.policy);
    if (const char* key = parameter_key(spec)) kv(key, parameter_value(spec));
    kv("trials", std::to_string(mc.n));
    kv("seed", std::to_string(a.seed));
    kv("file_size", mc.file_size);
    kv("truncation_bias_bound", mc.truncation_bias_bound);
    kv("interruptions", std::to_string(mc.interruptions));
    kv("p_hat", mc.p_hat.point);
    kv("p_lo", mc.p_hat.lo);
    kv("p_hi", mc.p_hat.hi);
    kv("cost_time", mc.cost_time.point);
    kv("cost_lo", mc.cost_time.lo);
    kv("cost_hi", mc.cost_time.hi);
    kv("cost_se", mc.cost_time.std_error);
    kv("costly_packets", mc.costly_packets.point);
    kv("kernel", std::string(kernels::to_string(kernels::active_isa())));
    return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string config;
    std::string figure = "both";
    std::map<std::string, std::string> overrides;  // filled from flags actually given
};

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << body;
}

int cmd_sweep(const SweepArgs& a) {
    ExperimentConfig cfg;
    if (!a.config.empty()) {
        if (std::filesystem::exists(a.config)) {
            cfg = load_config(a.config);
        } else {
            std::cerr << "warning: config file " << a.config << " not found; using flags and defaults\n";
        }
    }
    for (const auto& [key, value] : a.overrides) apply_config_value(cfg, key, value);
    cfg.validate();
    if (a.figure != "1" && a.figure != "2" && a.figure != "both") {
        throw UsageError("sweep: --figure must be 1, 2 or both");
    }
    std::filesystem::create_directories(cfg.output);

    if (a.figure == "1" || a.figure == "both") {
        std::ostringstream body;
        write_fig1_csv(body, fig1_rows(cfg));
        const auto path = cfg.output / "fig1.csv";
        write_file(path, body.str());
        write_sweep_metadata(path, cfg, "fig1");
        kv("fig1", path.string());
    }
    if (a.figure == "2" || a.figure == "both") {
        std::ostringstream body;
        write_fig2_csv(body, fig2_rows(cfg));
        const auto path = cfg.output / "fig2.csv";
        write_file(path, body.str());
        write_sweep_metadata(path, cfg, "fig2");
        kv("fig2", path.string());
    }
    return kExitOk;
}

// ---------------------------------------------------------------- hjb-check

struct HjbArgs {
    double r0 = 1.05;
    double rc = 0.15;
    int grid_x = 50;
    int grid_p = 50;
    std::optional<double> x_min, x_max;
    std::string anchor = "20,1e-3";
    double fd_step = 1e-5;
    int p_grid = 200;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    double horizon = 10.0;
    std::vector<double> steps{1e-3, 5e-4, 2.5e-4};
    std::string output = ".";
    unsigned threads = 0;
};

QoeTarget parse_anchor(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw UsageError("--anchor expects d,eps");
    try {
        std::size_t u1 = 0, u2 = 0;
        const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
        const QoeTarget t{std::stod(a, &u1), std::stod(b, &u2)};
        if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(s);
        return t;
    } catch (const std::logic_error&) {
        throw UsageError("--anchor expects d,eps, got '" + s + "'");
    }
}

int cmd_hjb_check(const HjbArgs& a) {
    const HjbModel model(ServerRates(a.r0, a.rc));
    const QoeTarget anchor = parse_anchor(a.anchor);
    anchor.validate();
    const auto cls = classify(anchor, model.exps);
    const double x_lo = a.x_min.value_or(cls.d_min);
    const double x_hi = a.x_max.value_or(cls.d_max);
    if (!(x_hi >= x_lo) || !(x_lo >= 0.0)) throw DomainError("hjb-check: need 0 <= x_min <= x_max");
    if (a.grid_x < 1 || a.grid_p < 1 || a.p_grid < 1) throw UsageError("hjb-check: grid sizes must be >= 1");

    const ResidualOptions opts{a.fd_step, a.p_grid};
    const auto points = region_grid(model, x_lo, x_hi, a.grid_x, a.grid_p);
    const auto empty_levels = static_cast<std::size_t>(a.grid_x) - points.size() / static_cast<std::size_t>(a.grid_p);
    if (empty_levels > 0) {
        std::cerr << "warning: skipped " << empty_levels << " buffer level(s) with no budget inside the region\n";
    }
    const auto grid = hjb_grid_check(model, points, opts);
    for (const auto& pt : grid.skipped) {
        std::cerr << "warning: skipped (" << num(pt.x) << ", " << num(pt.p)
                  << "): finite-difference stencil leaves the region\n";
    }
    std::filesystem::create_directories(a.output);
    std::ostringstream body;
    write_hjb_csv(body, grid.rows);
    const auto path = std::filesystem::path(a.output) / "hjb.csv";
    write_file(path, body.str());
    {
        nlohmann::ordered_json meta;
        meta["csv"] = "hjb.csv";
        meta["r0"] = a.r0;
        meta["rc"] = a.rc;
        meta["x_min"] = x_lo;
        meta["x_max"] = x_hi;
        meta["grid_x"] = a.grid_x;
        meta["grid_p"] = a.grid_p;
        meta["points"] = grid.rows.size();
        meta["skipped"] = grid.skipped.size();
        meta["fd_step"] = a.fd_step;
        meta["p_grid"] = a.p_grid;
        meta["anchor_d"] = anchor.d;
        meta["anchor_eps"] = anchor.eps;
        meta["trials"] = a.trials;
        meta["seed"] = a.seed;
        meta["horizon"] = a.horizon;
        meta["steps"] = a.steps;
        meta["beta"] = model.exps.beta;
        meta["theta"] = model.exps.theta;
        meta["rng"] = "splitmix64 counter streams keyed by (seed, trial)";
        write_file(std::filesystem::path(path) += ".meta.json", meta.dump(2) + "\n");
    }

    kv("hjb_csv", path.string());
    kv("points", std::to_string(grid.rows.size()));
    kv("skipped", std::to_string(grid.skipped.size()));
    kv("argmin_agreement", static_cast<double>(grid.agreement_rate()));
    kv("exact_zone_points", std::to_string(grid.n_exact));
    kv("exact_zone_max_rel_residual", grid.max_rel_exact);
    kv("exact_zone_median_rel_residual", grid.median_rel_exact);
    kv("outside_points", std::to_string(grid.n_outside));
    kv("outside_max_rel_residual", grid.max_rel_outside);
    kv("outside_median_rel_residual", grid.median_rel_outside);

    if (cls.region != Region::Interior) {
        std::cerr << "warning: anchor is not interior; manifold simulation skipped\n";
        return kExitOk;
    }
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const auto rep =
            simulate_expanded_state(anchor, model, a.trials, a.seed,
                                    {a.steps[i], a.horizon, EscapePolicy::Count, a.threads});
        if (rep.escaped > 0) {
            std::cerr << "warning: step " << num(a.steps[i]) << ": " << rep.escaped
                      << " path(s) stopped after p left (0, 1]\n";
        }
        const std::string tag = "step" + std::to_string(i);
        kv(tag, a.steps[i]);
        kv(tag + "_manifold_max_deviation", rep.max_deviation);
        kv(tag + "_mean_p_end", rep.mean_p_end);
        kv(tag + "_mean_p_end_se", rep.mean_p_end_se);
        kv(tag + "_ruined", std::to_string(rep.ruined));
        kv(tag + "_escaped", std::to_string(rep.escaped));
    }
    kv("eps", anchor.eps);
    // The value constants use beta, the threshold uses theta.
    kv("beta", model.exps.beta);
    kv("theta", model.exps.theta);
    kv("beta_theta_mismatch", std::to_string(model.exps.beta != model.exps.theta ? 1 : 0));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-server streaming association policies: design, simulation and checks"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    RootsArgs roots;
    auto* s_roots = app.add_subcommand("roots", "Largest root of r + R(e^{-r} - 1) and the derived exponents");
    s_roots->add_option("--rate", roots.rate, "Single arrival rate R > 1");
    s_roots->add_option("--r0", roots.r0, "Free server rate");
    s_roots->add_option("--rc", roots.rc, "Costly server rate");
    s_roots->add_option("--eps", roots.eps, "Also print D-bar for this interruption target");

    TargetArgs region;
    auto* s_region = app.add_subcommand("region", "Classify a (D, eps) target");
    auto add_target = [](CLI::App* s, TargetArgs& t) {
        s->add_option("--d", t.d, "Initial buffer D (packets)")->capture_default_str();
        s->add_option("--eps", t.eps, "Interruption probability target")->capture_default_str();
        s->add_option("--r0", t.r0, "Free server rate")->capture_default_str();
        s->add_option("--rc", t.rc, "Costly server rate")->capture_default_str();
    };
    add_target(s_region, region);

    TargetArgs thr;
    std::string thr_policy = "risky";
    auto* s_thr = app.add_subcommand("threshold", "Designed policy parameter and analytic cost");
    add_target(s_thr, thr);
    s_thr->add_option("--policy", thr_policy, "Policy family")
        ->check(CLI::IsMember(kFamilies))
        ->capture_default_str();

    SimulateArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Monte Carlo estimate for one policy");
    add_target(s_sim, sim.target);
    s_sim->add_option("--policy", sim.policy, "Policy family")->check(CLI::IsMember(kFamilies))->capture_default_str();
    s_sim->add_option("--param", sim.param, "Override the designed switch time / level / threshold");
    s_sim->add_option("--trials", sim.trials, "Trajectories")->capture_default_str();
    s_sim->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
    s_sim->add_option("--file-size", sim.file_size, "Packets in the file, or auto")->capture_default_str();
    s_sim->add_option("--truncation-tol", sim.truncation_tol, "Tolerance for the auto file size")
        ->capture_default_str();
    s_sim->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->capture_default_str();

    SweepArgs sweep;
    std::map<std::string, std::string> sweep_flags;
    auto* s_sweep = app.add_subcommand("sweep", "Write fig1.csv / fig2.csv over a grid of initial buffers");
    s_sweep->add_option("--config", sweep.config, "key = value file; flags override its values");
    s_sweep->add_option("--figure", sweep.figure, "1, 2 or both")->capture_default_str();
    std::map<std::string, CLI::Option*> sweep_opts;
    for (const auto& key : config_keys()) {
        std::string flag = "--" + key;
        for (auto& c : flag) if (c == '_') c = '-';
        sweep_opts[key] = s_sweep->add_option(flag, sweep_flags[key], "Overrides config key " + key);
    }

    HjbArgs hjb;
    auto* s_hjb = app.add_subcommand("hjb-check", "Residuals of the candidate value function and manifold checks");
    s_hjb->add_option("--r0", hjb.r0, "Free server rate")->capture_default_str();
    s_hjb->add_option("--rc", hjb.rc, "Costly server rate")->capture_default_str();
    s_hjb->add_option("--grid-x", hjb.grid_x, "Buffer levels in the grid")->capture_default_str();
    s_hjb->add_option("--grid-p", hjb.grid_p, "Budgets per level")->capture_default_str();
    s_hjb->add_option("--x-min", hjb.x_min, "Lowest buffer level (default: d_min of the anchor eps)");
    s_hjb->add_option("--x-max", hjb.x_max, "Highest buffer level (default: d_max of the anchor eps)");
    s_hjb->add_option("--anchor", hjb.anchor, "Manifold anchor d,eps")->capture_default_str();
    s_hjb->add_option("--fd-step", hjb.fd_step, "Relative finite-difference step")->capture_default_str();
    s_hjb->add_option("--p-grid", hjb.p_grid, "Fallback grid size for p'")->capture_default_str();
    s_hjb->add_option("--trials", hjb.trials, "Expanded-state trajectories")->capture_default_str();
    s_hjb->add_option("--seed", hjb.seed, "Master seed")->capture_default_str();
    s_hjb->add_option("--horizon", hjb.horizon, "Simulated time per trajectory")->capture_default_str();
    s_hjb->add_option("--steps", hjb.steps, "Euler steps for the convergence report, each <= 1e-3")
        ->delimiter(',')
        ->capture_default_str();
    s_hjb->add_option("--output", hjb.output, "Directory for hjb.csv")->capture_default_str();
    s_hjb->add_option("--threads", hjb.threads, "Worker threads (0 = all cores)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (s_roots->parsed()) return cmd_roots(roots);
        if (s_region->parsed()) return cmd_region(region);
        if (s_thr->parsed()) return cmd_threshold(thr, thr_policy);
        if (s_sim->parsed()) return cmd_simulate(sim);
        if (s_sweep->parsed()) {
            for (const auto& [key, opt] : sweep_opts) {
                if (opt->count() > 0) sweep.overrides[key] = sweep_flags[key];
            }
            return cmd_sweep(sweep);
        }
        if (s_hjb->parsed()) return cmd_hjb_check(hjb);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InfeasibleTarget& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitUsage;
}
