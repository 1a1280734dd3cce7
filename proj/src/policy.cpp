#include "qoe/policy.hpp"

#include <cmath>
#include <limits>

namespace qoe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// eps - e^{-alpha1 D}: the interruption budget left after paying for the
// phase spent on both servers. Must be positive for any of the designs.
double residual_budget(const QoeTarget& target, const DecayExponents& exps) {
    const RegionClass rc = classify(target, exps);
    if (rc.region == Region::Infeasible) {
        throw InfeasibleTarget("no feasible policy: D = " + std::to_string(target.d) +
                               " is below d_min = " + std::to_string(rc.d_min));
    }
    const double budget = target.eps - std::exp(-exps.alpha1 * target.d);
    if (!(budget > 0.0)) {
        throw InfeasibleTarget("target lies on the lower boundary of the feasible region");
    }
    return budget;
}

double safe_level(const QoeTarget& target, const DecayExponents& exps) {
    return std::log(1.0 / residual_budget(target, exps)) / exps.alpha0;
}

} // namespace

void validate(const PolicySpec& spec) {
    std::visit(overloaded{
                   [](const policies::Offline& p) {
                       if (!(p.switch_time >= 0.0)) throw DomainError("offline switch time must be >= 0");
                   },
                   [](const policies::Safe& p) {
                       if (!(p.level >= 0.0)) throw DomainError("safe threshold must be >= 0");
                   },
                   [](const policies::Risky& p) {
                       if (!(p.threshold >= 0.0)) throw DomainError("risky threshold must be >= 0");
                   },
                   [](const auto&) {},
               },
               spec);
}

std::string_view policy_name(const PolicySpec& spec) {
    return std::visit(overloaded{
                          [](const policies::FreeOnly&) { return std::string_view("free-only"); },
                          [](const policies::BothAlways&) { return std::string_view("both-always"); },
                          [](const policies::Offline&) { return std::string_view("offline"); },
                          [](const policies::Safe&) { return std::string_view("safe"); },
                          [](const policies::Risky&) { return std::string_view("risky"); },
                      },
                      spec);
}

void PolicyState::observe(const PolicySpec& spec, double x) {
    if (const auto* safe = std::get_if<policies::Safe>(&spec)) {
        if (x >= safe->level) latched_done = true;
    }
}

int decide(const PolicySpec& spec, const PolicyState& state, double t, double x) {
    return std::visit(overloaded{
                          [](const policies::FreeOnly&) { return 0; },
                          [](const policies::BothAlways&) { return 1; },
                          [t](const policies::Offline& p) { return t <= p.switch_time ? 1 : 0; },
                          [&state](const policies::Safe&) { return state.latched_done ? 0 : 1; },
                          [x](const policies::Risky& p) { return (x > 0.0 && x < p.threshold) ? 1 : 0; },
                      },
                      spec);
}

double offline_switch_time(const QoeTarget& target, const ServerRates& rates) {
    const DecayExponents exps = DecayExponents::from(rates);
    const double level = safe_level(target, exps);
    const double ts = rates.free() / (rates.both() - rates.free()) * (level - target.d);
    return std::max(0.0, ts);
}

CostReport offline_cost(const QoeTarget& target, const ServerRates& rates) {
    // Usage time is min(t_s, stopping time) <= t_s.
    const double ts = offline_switch_time(target, rates);
    return {ts, true, ts * rates.costly(), 0.0};
}

double safe_threshold(const QoeTarget& target, const ServerRates& rates) {
    return safe_level(target, DecayExponents::from(rates));
}

CostReport safe_cost(const QoeTarget& target, const ServerRates& rates) {
    const double level = safe_threshold(target, rates);
    const double drift = rates.both() - 1.0;
    const double cost = std::max(0.0, level - target.d) / drift;
    // Overshoot xi in [0, 1) adds xi/(R1-1); none if the level is already met.
    const double band = level > target.d ? 1.0 / drift : 0.0;
    return {cost, false, cost * rates.costly(), band};
}

RiskyBranches risky_threshold_branches(const QoeTarget& target, const DecayExponents& exps) {
    const double a0 = exps.alpha0;
    const double a1 = exps.alpha1;
    const double tail = std::exp(-a1 * target.d);
    RiskyBranches b{};
    b.above = (std::log(exps.beta / target.eps) - a0 * target.d) / (a1 - a0);
    const double num = target.eps + exps.beta * (1.0 - tail) - 1.0;
    const double den = target.eps - tail;
    b.below = (num > 0.0 && den > 0.0) ? std::log(num / den) / a1
                                       : std::numeric_limits<double>::quiet_NaN();
    return b;
}

double risky_threshold(const QoeTarget& target, const ServerRates& rates) {
    const DecayExponents exps = DecayExponents::from(rates);
    residual_budget(target, exps);
    const RiskyBranches b = risky_threshold_branches(target, exps);
    if (target.d >= exps.d_bar(target.eps)) {
        return std::max(0.0, b.above);
    }
    if (std::isnan(b.below)) {
        throw NumericError("risky threshold: non-positive log argument below D-bar");
    }
    return b.below;
}

CostReport risky_cost_bound(const QoeTarget& target, const ServerRates& rates) {
    const DecayExponents exps = DecayExponents::from(rates);
    const double t = risky_threshold(target, rates);
    const double drift = rates.both() - 1.0;
    double bound = 0.0;
    if (target.d >= exps.d_bar(target.eps)) {
        bound = exps.beta / (exps.alpha1 * drift) * std::exp(-exps.alpha0 * (target.d - t));
    } else {
        const double reach = (1.0 - std::exp(-exps.alpha1 * target.d)) /
                             (1.0 - std::exp(-exps.alpha1 * t));
        bound = reach / drift * (t + 1.0 + exps.beta / exps.alpha1) - target.d / drift;
    }
    bound = std::max(0.0, bound);
    return {bound, true, bound * rates.costly(), 0.0};
}

PolicySpec designed_policy(std::string_view family, const QoeTarget& target,
                           const ServerRates& rates) {
    if (family == "offline") return policies::Offline{offline_switch_time(target, rates)};
    if (family == "safe") return policies::Safe{safe_threshold(target, rates)};
    if (family == "risky") return policies::Risky{risky_threshold(target, rates)};
    if (family == "free-only") return policies::FreeOnly{};
    if (family == "both-always") return policies::BothAlways{};
    throw DomainError("unknown policy family '" + std::string(family) + "'");
}

CostReport designed_cost(std::string_view family, const QoeTarget& target,
                         const ServerRates& rates) {
    if (family == "offline") return offline_cost(target, rates);
    if (family == "safe") return safe_cost(target, rates);
    if (family == "risky") return risky_cost_bound(target, rates);
    if (family == "free-only") {
        if (classify(target, rates).region != Region::FreeOnlySufficient) {
            throw InfeasibleTarget("free server alone does not meet the target");
        }
        return {0.0, false, 0.0, 0.0};
    }
    if (family == "both-always") {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, false, inf, 0.0};
    }
    throw DomainError("unknown policy family '" + std::string(family) + "'");
}

double stopping_prob_reach_before_ruin(double d, double t, double rate, double overshoot) {
    if (!(rate > 1.0)) throw DomainError("stopping probability: rate must satisfy R > 1");
    if (!(d > 0.0 && d <= t)) throw DomainError("stopping probability: need 0 < d <= t");
    if (!(overshoot >= 0.0 && overshoot <= 1.0)) {
        throw DomainError("stopping probability: overshoot surrogate must lie in [0, 1]");
    }
    const double r = largest_root(rate);
    return -std::expm1(-r * d) / -std::expm1(-r * (t + overshoot));
}

ProbabilityInterval stopping_prob_interval(double d, double t, double rate) {
    return {stopping_prob_reach_before_ruin(d, t, rate, 1.0),
            stopping_prob_reach_before_ruin(d, t, rate, 0.0)};
}

} // namespace qoe
