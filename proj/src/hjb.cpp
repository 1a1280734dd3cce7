#include "qoe/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "qoe/rng.hpp"

namespace qoe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_region(const HjbPoint& pt, const HjbModel& model, const char* who) {
    if (!model.in_region(pt)) {
        throw DomainError(std::string(who) + ": (x, p) = (" + std::to_string(pt.x) + ", " +
                          std::to_string(pt.p) + ") is outside the region p > e^{-alpha1 x}");
    }
}

// V on one named side of the switching curve, evaluated without the branch
// test so one-sided stencils stay on a single smooth piece.
double value_upper(const HjbPoint& pt, const HjbModel& m) {
    const auto& e = m.exps;
    const double t = (std::log(e.theta / pt.p) - e.alpha0 * pt.x) / (e.alpha1 - e.alpha0);
    const double c = 1.0 / (e.alpha0 * (1.0 - e.alpha0 / 2.0) * (m.rates.both() - 1.0));
    return c * std::exp(-e.alpha0 * (pt.x - t));
}

double lower_threshold(const HjbPoint& pt, const HjbModel& m) {
    const auto& e = m.exps;
    const double tail = std::exp(-e.alpha1 * pt.x);
    return std::log((pt.p + e.theta * (1.0 - tail) - 1.0) / (pt.p - tail)) / e.alpha1;
}

double value_lower(const HjbPoint& pt, const HjbModel& m) {
    const auto& e = m.exps;
    const double drift = m.rates.both() - 1.0;
    const double tail = std::exp(-e.alpha1 * pt.x);
    const double weight = (pt.p + e.theta * (1.0 - tail) - 1.0) / (drift * (e.theta - 1.0));
    return weight * (lower_threshold(pt, m) + e.beta / e.alpha1) - pt.x / drift;
}

double value_on_side(const HjbPoint& pt, const HjbModel& m, bool upper) {
    return upper ? value_upper(pt, m) : value_lower(pt, m);
}

template <class F>
double derivative(F&& f, double at, double h, int side) {
    // side 0: central; +1 forward one-sided; -1 backward one-sided. All O(h^2).
    if (side == 0) return (f(at + h) - f(at - h)) / (2.0 * h);
    const double s = static_cast<double>(side);
    return s * (-3.0 * f(at) + 4.0 * f(at + s * h) - f(at + 2.0 * s * h)) / (2.0 * h);
}

} // namespace

double HjbModel::switch_level(double p) const {
    return std::log(exps.theta / p) / exps.alpha1;
}

bool HjbModel::in_region(const HjbPoint& pt) const {
    return pt.x >= 0.0 && std::isfinite(pt.x) && pt.p <= 1.0 && pt.p > std::exp(-exps.alpha1 * pt.x);
}

double threshold_T(const HjbPoint& pt, const HjbModel& model) {
    require_region(pt, model, "threshold_T");
    const auto& e = model.exps;
    if (pt.x >= model.switch_level(pt.p)) {
        return (std::log(e.theta / pt.p) - e.alpha0 * pt.x) / (e.alpha1 - e.alpha0);
    }
    return lower_threshold(pt, model);
}

double value_candidate(const HjbPoint& pt, const HjbModel& model) {
    require_region(pt, model, "value_candidate");
    return value_on_side(pt, model, pt.x >= model.switch_level(pt.p));
}

int optimal_action(const HjbPoint& pt, const HjbModel& model) {
    require_region(pt, model, "optimal_action");
    return pt.x >= model.switch_level(pt.p) ? 0 : 1;
}

namespace {

// The manifold through one anchor, with T(anchor) evaluated once.
struct Manifold {
    const DecayExponents& e;
    double t;
    double at;

    Manifold(const HjbPoint& anchor, const HjbModel& model)
        : e(model.exps), t(threshold_T(anchor, model)), at(std::exp(-model.exps.alpha1 * t)) {}

    double operator()(double x) const {
        if (!(x >= 0.0)) throw DomainError("manifold_p: x must be >= 0");
        double p = 0.0;
        if (x >= t) {
            p = e.theta * std::exp(-e.alpha0 * x - (e.alpha1 - e.alpha0) * t);
        } else {
            p = ((e.theta - 1.0) * at + std::exp(-e.alpha1 * x) * (1.0 - e.theta * at)) / (1.0 - at);
        }
        // x = 0 lands on p = 1 up to rounding.
        if (p > 1.0 && p < 1.0 + 1e-12) p = 1.0;
        if (!(p > 0.0 && p <= 1.0)) {
            throw NumericError("manifold_p: value " + std::to_string(p) + " outside (0, 1] at x = " +
                               std::to_string(x));
        }
        return p;
    }
};

} // namespace

double manifold_p(double x, const HjbPoint& anchor, const HjbModel& model) {
    return Manifold(anchor, model)(x);
}

double manifold_p(double x, const QoeTarget& anchor, const HjbModel& model) {
    anchor.validate();
    return manifold_p(x, HjbPoint{anchor.d, anchor.eps}, model);
}

double dv_dx(const HjbPoint& pt, const HjbModel& model, double fd_step) {
    require_region(pt, model, "dv_dx");
    const double h = fd_step * std::max(1.0, std::abs(pt.x));
    const double split = model.switch_level(pt.p);
    const bool upper = pt.x >= split;
    int side = 0;
    if (pt.x - h < split && pt.x + h >= split) side = upper ? +1 : -1;
    const double reach = side == 0 ? h : 2.0 * h;
    const double lowest = side == +1 ? pt.x : pt.x - reach;
    if (!model.in_region({lowest, pt.p})) throw DomainError("dv_dx: stencil leaves the region");
    auto f = [&](double x) { return value_on_side({x, pt.p}, model, upper); };
    return derivative(f, pt.x, h, side);
}

double dv_dp(const HjbPoint& pt, const HjbModel& model, double fd_step) {
    require_region(pt, model, "dv_dp");
    const double h = fd_step * pt.p;
    // Upper side of the switching curve is p >= theta e^{-alpha1 x}.
    const double p_split = model.exps.theta * std::exp(-model.exps.alpha1 * pt.x);
    const bool upper = pt.p >= p_split;
    int side = 0;
    if (pt.p - h < p_split && pt.p + h >= p_split) side = upper ? +1 : -1;
    const double reach = side == 0 ? h : 2.0 * h;
    const double lowest = side == +1 ? pt.p : pt.p - reach;
    const double highest = side == -1 ? pt.p : pt.p + reach;
    if (!model.in_region({pt.x, lowest}) || !model.in_region({pt.x, highest})) {
        throw DomainError("dv_dp: stencil leaves the region");
    }
    auto f = [&](double p) { return value_on_side({pt.x, p}, model, upper); };
    return derivative(f, pt.p, h, side);
}

HjbResidualReport hjb_residual(const HjbPoint& pt, const HjbModel& model, const ResidualOptions& opts) {
    require_region(pt, model, "hjb_residual");
    HjbResidualReport rep;
    rep.point = pt;
    rep.lhs = dv_dx(pt, model, opts.fd_step);
    rep.dv_dp = dv_dp(pt, model, opts.fd_step);
    rep.in_exact_zone = pt.x >= model.switch_level(pt.p) - 1.0;

    const double v = value_candidate(pt, model);
    const double x_next = pt.x + 1.0;
    const double lo = std::exp(-model.exps.alpha1 * x_next);

    double manifold_next = kInf;
    if (pt.p < 1.0) {
        try {
            manifold_next = manifold_p(x_next, pt, model);
        } catch (const NumericError&) {
            manifold_next = kInf;
        }
    }

    for (int u = 0; u <= 1; ++u) {
        const double rate = model.rates.under(u);
        auto bracket = [&](double q) {
            return u + rep.dv_dp * (pt.p - q) * rate + rate * (value_candidate({x_next, q}, model) - v);
        };
        ActionMinimum best{kInf, 0.0, false};
        const double log_lo = std::log(lo);
        for (int k = 1; k <= opts.p_grid; ++k) {
            const double q = std::min(1.0, std::exp(log_lo * (1.0 - static_cast<double>(k) / opts.p_grid)));
            const double val = bracket(q);
            if (val < best.value) best = {val, q, false};
        }
        if (manifold_next > lo && manifold_next <= 1.0) {
            const double val = bracket(manifold_next);
            if (val < best.value) best = {val, manifold_next, true};
        }
        rep.by_action[u] = best;
    }
    rep.argmin_u = rep.by_action[1].value < rep.by_action[0].value ? 1 : 0;
    rep.rhs = rep.by_action[rep.argmin_u].value;
    rep.residual = rep.lhs - rep.rhs;
    const double scale = std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1e-300});
    rep.relative_residual = std::abs(rep.residual) / scale;
    return rep;
}

std::vector<HjbPoint> region_grid(const HjbModel& model, double x_lo, double x_hi, int nx, int np,
                                  double inset) {
    std::vector<HjbPoint> pts;
    if (nx < 1 || np < 1) return pts;
    pts.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(np));
    for (int i = 0; i < nx; ++i) {
        const double x = nx == 1 ? x_lo : x_lo + (x_hi - x_lo) * i / (nx - 1);
        const double p_lo = std::exp(-model.exps.alpha1 * x) * (1.0 + inset);
        const double p_hi = std::min(1.0, std::exp(-model.exps.alpha0 * x));
        if (!(p_lo < p_hi)) continue;
        const double l0 = std::log(p_lo);
        const double l1 = std::log(p_hi);
        for (int j = 0; j < np; ++j) {
            const double p = np == 1 ? p_lo : std::exp(l0 + (l1 - l0) * j / (np - 1));
            pts.push_back({x, p});
        }
    }
    return pts;
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

} // namespace

HjbGridResult hjb_grid_check(const HjbModel& model, const std::vector<HjbPoint>& points,
                             const ResidualOptions& opts) {
    HjbGridResult out;
    std::vector<double> exact;
    std::vector<double> outside;
    for (const auto& pt : points) {
        HjbResidualReport rep;
        try {
            rep = hjb_residual(pt, model, opts);
        } catch (const DomainError&) {
            out.skipped.push_back(pt);
            continue;
        }
        if (rep.argmin_u == optimal_action(pt, model)) ++out.agree;
        if (rep.in_exact_zone) {
            exact.push_back(rep.relative_residual);
            out.max_rel_exact = std::max(out.max_rel_exact, rep.relative_residual);
        } else {
            outside.push_back(rep.relative_residual);
            out.max_rel_outside = std::max(out.max_rel_outside, rep.relative_residual);
        }
        out.rows.push_back(rep);
    }
    out.n_exact = exact.size();
    out.n_outside = outside.size();
    out.median_rel_exact = median(std::move(exact));
    out.median_rel_outside = median(std::move(outside));
    return out;
}

ExpandedStateReport simulate_expanded_state(const QoeTarget& anchor, const HjbModel& model,
                                            std::uint64_t trials, std::uint64_t seed,
                                            const ExpandedStateOptions& opts) {
    anchor.validate();
    const HjbPoint a{anchor.d, anchor.eps};
    if (classify(anchor, model.exps).region != Region::Interior) {
        throw DomainError("simulate_expanded_state: anchor must be an interior target");
    }
    if (!(opts.step > 0.0 && opts.step <= 1e-3) || !(opts.horizon > 0.0)) {
        throw DomainError("simulate_expanded_state: need 0 < step <= 1e-3 and a positive horizon");
    }
    if (trials < 1) throw DomainError("simulate_expanded_state: trials must be >= 1");
    const Manifold on_manifold(a, model);

    struct Block {
        double p_sum = 0.0;
        double p_sq = 0.0;
        double max_dev = 0.0;
        std::uint64_t ruined = 0;
        std::uint64_t escaped = 0;
        std::uint64_t jumps = 0;
    };
    constexpr std::uint64_t kBlock = 64;
    const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
    std::vector<Block> parts(blocks);

    detail::for_each_block(blocks, opts.threads, [&](std::uint64_t b) {
        Block& blk = parts[b];
        const std::uint64_t last = std::min(trials, (b + 1) * kBlock);
        for (std::uint64_t i = b * kBlock; i < last; ++i) {
            TrialStreams streams(seed, i);
            double x = anchor.d;
            double p = anchor.eps;
            double t = 0.0;
            double clock = streams.arrivals.next();  // remaining integrated intensity to next jump
            bool ruined = false;
            bool escaped = false;
            while (t < opts.horizon) {
                const int u = x >= model.switch_level(p) ? 0 : 1;
                const double rate = model.rates.under(u);
                double dt = std::min(opts.step, opts.horizon - t);
                const bool jump = clock <= rate * dt;
                if (jump) dt = clock / rate;
                if (x <= dt) {
                    // Drains out before the step ends.
                    ruined = true;
                    break;
                }
                const double target = on_manifold(x + 1.0);
                p += (p - target) * rate * dt;
                x -= dt;
                t += dt;
                clock -= rate * dt;
                if (jump) {
                    x += 1.0;
                    p = on_manifold(x);
                    clock = streams.arrivals.next();
                    ++blk.jumps;
                }
                if (!(p > 0.0 && p <= 1.0)) {
                    if (opts.on_escape == EscapePolicy::Throw || std::isnan(p)) {
                        throw NumericError("simulate_expanded_state: p = " + std::to_string(p) +
                                           " left (0, 1] at t = " + std::to_string(t) +
                                           ", x = " + std::to_string(x));
                    }
                    escaped = true;
                    p = p > 1.0 ? 1.0 : 0.0;
                    break;
                }
                blk.max_dev = std::max(blk.max_dev, std::abs(p - on_manifold(x)));
            }
            if (escaped) ++blk.escaped;
            if (ruined) {
                ++blk.ruined;
                p = 1.0;
            }
            blk.p_sum += p;
            blk.p_sq += p * p;
        }
    });

    ExpandedStateReport rep;
    rep.trials = trials;
    double p_sum = 0.0;
    double p_sq = 0.0;
    for (const Block& blk : parts) {
        p_sum += blk.p_sum;
        p_sq += blk.p_sq;
        rep.max_deviation = std::max(rep.max_deviation, blk.max_dev);
        rep.ruined += blk.ruined;
        rep.escaped += blk.escaped;
        rep.jumps += blk.jumps;
    }
    const double n = static_cast<double>(trials);
    rep.mean_p_end = p_sum / n;
    rep.mean_p_end_se = trials > 1 ? std::sqrt(std::max(0.0, (p_sq - p_sum * p_sum / n) / (n - 1.0)) / n) : kInf;
    return rep;
}

} // namespace qoe
