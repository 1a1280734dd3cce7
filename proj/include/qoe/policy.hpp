#pragma once

// Association policies: which servers to use given the observed history, plus
// closed-form designs of the switching parameter and the cost it implies.

#include <string>
#include <string_view>
#include <variant>

#include "qoe/analytic.hpp"

namespace qoe {

namespace policies {
struct FreeOnly {};
struct BothAlways {};
/// Both servers for t <= switch_time, then free only.
struct Offline { double switch_time; };
/// Both servers until the buffer first reaches level, then free only forever.
struct Safe { double level; };
/// Both servers exactly while 0 < x < threshold.
struct Risky { double threshold; };
} // namespace policies

using PolicySpec = std::variant<policies::FreeOnly, policies::BothAlways, policies::Offline,
                                policies::Safe, policies::Risky>;

/// Throws DomainError for negative parameters.
void validate(const PolicySpec& spec);

std::string_view policy_name(const PolicySpec& spec);

/// Per-trajectory memory. Only the safe policy needs any.
struct PolicyState {
    bool latched_done = false;

    /// Records a threshold crossing; never cleared afterwards.
    void observe(const PolicySpec& spec, double x);
};

/// Action in {0, 1} at time t with buffer x > 0.
int decide(const PolicySpec& spec, const PolicyState& state, double t, double x);

struct CostReport {
    double expected_cost_time;    // expected time connected to the costly server
    bool is_bound;                // true: upper bound; false: exact up to overshoot
    double costly_packets_equiv;  // expected_cost_time * Rc
    double overshoot_band;        // additive uncertainty on expected_cost_time (>= 0)
};

/// t_s* = R0/(R1-R0) [ (1/alpha0) log(1/(eps - e^{-alpha1 D})) - D ], clamped at 0.
double offline_switch_time(const QoeTarget& target, const ServerRates& rates);
CostReport offline_cost(const QoeTarget& target, const ServerRates& rates);

/// S* = (1/alpha0) log(1/(eps - e^{-alpha1 D})).
double safe_threshold(const QoeTarget& target, const ServerRates& rates);
/// (S* - D)/(R1 - 1) at zero overshoot; the band is 1/(R1 - 1).
CostReport safe_cost(const QoeTarget& target, const ServerRates& rates);

/// T* from the two-branch design split at D-bar.
double risky_threshold(const QoeTarget& target, const ServerRates& rates);
CostReport risky_cost_bound(const QoeTarget& target, const ServerRates& rates);

/// Both branches of the risky design evaluated unconditionally. Exposed for
/// continuity checks at D = D-bar.
struct RiskyBranches {
    double above;  // D >= D-bar form
    double below;  // D <= D-bar form
};
RiskyBranches risky_threshold_branches(const QoeTarget& target, const DecayExponents& exps);

/// Designed policy of a family ("offline", "safe", "risky", "free-only",
/// "both-always"). Throws InfeasibleTarget / DomainError as the designs do.
PolicySpec designed_policy(std::string_view family, const QoeTarget& target,
                           const ServerRates& rates);

/// Analytic cost of a designed policy. FreeOnly is 0 when the free server
/// suffices and InfeasibleTarget otherwise; BothAlways has unbounded usage
/// time for an infinite file and reports +inf.
CostReport designed_cost(std::string_view family, const QoeTarget& target,
                         const ServerRates& rates);

struct ProbabilityInterval {
    double lo;
    double hi;
};

/// Probability that a single server of the given rate lifts the buffer from d
/// to t before it empties. The unknown conditional E[e^{-rbar x_tau}] is
/// replaced by e^{-rbar (t + overshoot)} with overshoot in [0, 1].
double stopping_prob_reach_before_ruin(double d, double t, double rate, double overshoot);

/// The values at overshoot 1 (lo) and 0 (hi).
ProbabilityInterval stopping_prob_interval(double d, double t, double rate);

inline constexpr double kDefaultOvershoot = 0.5;

} // namespace qoe
