#pragma once

// Expanded-state (x, p) view of the probabilistically constrained control
// problem: x is the buffer, p the interruption budget still allowed. This
// module evaluates the candidate value function and its threshold structure,
// and checks numerically how well the candidate satisfies
//
//   dV/dx = min_{u, p'} { u + dV/dp (p - p') R_u + R_u (V(x+1, p') - V(x, p)) }.
//
// The threshold T(x, p) is built from theta = alpha1/alpha0, while the value
// constants carry beta = alpha1/(alpha0 (1 - alpha0/2)). The two do not agree
// exactly; the residual checker reports the consequences.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qoe/analytic.hpp"

namespace qoe {

struct HjbPoint {
    double x;
    double p;
};

/// Rates plus their decay exponents, computed once.
struct HjbModel {
    ServerRates rates;
    DecayExponents exps;

    explicit HjbModel(const ServerRates& r) : rates(r), exps(DecayExponents::from(r)) {}

    /// (1/alpha1) log(theta/p): the switching curve of the optimal action.
    double switch_level(double p) const;
    /// p > e^{-alpha1 x}, p <= 1, x >= 0.
    bool in_region(const HjbPoint& pt) const;
};

/// T(x, p). Throws DomainError outside the region.
double threshold_T(const HjbPoint& pt, const HjbModel& model);

/// Candidate value V(x, p). Throws DomainError outside the region.
double value_candidate(const HjbPoint& pt, const HjbModel& model);

/// 0 iff x >= switch_level(p).
int optimal_action(const HjbPoint& pt, const HjbModel& model);

/// Point on the invariant manifold through `anchor` at buffer level x.
/// The lower branch is written so that it passes through the anchor and is
/// continuous at x = T(anchor):
///   p = [(theta-1) e^{-a1 T} + e^{-a1 x} (1 - theta e^{-a1 T})] / (1 - e^{-a1 T}).
/// Throws NumericError if the value leaves (0, 1].
double manifold_p(double x, const HjbPoint& anchor, const HjbModel& model);
double manifold_p(double x, const QoeTarget& anchor, const HjbModel& model);

struct ResidualOptions {
    double fd_step = 1e-5;          // relative finite-difference step
    int p_grid = 200;               // log-spaced fallback grid for p'
};

struct ActionMinimum {
    double value = 0.0;             // min over p' of the bracket for this u
    double p_next = 0.0;            // minimizing p'
    bool from_manifold = false;     // the manifold candidate won over the grid
};

struct HjbResidualReport {
    HjbPoint point{};
    double lhs = 0.0;               // dV/dx
    double rhs = 0.0;               // minimized right-hand side
    double residual = 0.0;          // lhs - rhs
    double relative_residual = 0.0; // |residual| / max(|lhs|, |rhs|)
    int argmin_u = 0;
    bool in_exact_zone = false;     // x >= switch_level(p) - 1
    double dv_dp = 0.0;
    ActionMinimum by_action[2];
};

/// Throws DomainError when a finite-difference stencil leaves the region.
HjbResidualReport hjb_residual(const HjbPoint& pt, const HjbModel& model,
                               const ResidualOptions& opts = {});

/// Partial derivatives of the candidate. Central differences, switching to
/// second-order one-sided stencils when the central one straddles the
/// switching curve.
double dv_dx(const HjbPoint& pt, const HjbModel& model, double fd_step);
double dv_dp(const HjbPoint& pt, const HjbModel& model, double fd_step);

/// nx buffer levels in [x_lo, x_hi]; at each, np budgets log-spaced between
/// e^{-alpha1 x} (1 + inset) and min(1, e^{-alpha0 x}). Levels where that
/// band is empty are skipped.
std::vector<HjbPoint> region_grid(const HjbModel& model, double x_lo, double x_hi, int nx, int np,
                                  double inset = 1e-3);

struct HjbGridResult {
    std::vector<HjbResidualReport> rows;   // in input order
    std::vector<HjbPoint> skipped;         // stencil left the region
    std::size_t agree = 0;                 // argmin_u == optimal_action
    std::size_t n_exact = 0;
    std::size_t n_outside = 0;
    double max_rel_exact = 0.0;
    double median_rel_exact = 0.0;
    double max_rel_outside = 0.0;
    double median_rel_outside = 0.0;

    double agreement_rate() const {
        return rows.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(rows.size());
    }
};

/// Residuals at every point. Points whose stencil leaves the region are
/// recorded in `skipped` instead of failing the run.
HjbGridResult hjb_grid_check(const HjbModel& model, const std::vector<HjbPoint>& points,
                             const ResidualOptions& opts = {});

/// What to do when p_t leaves (0, 1]. Count ends the path there with p
/// clamped to the nearer end and tallies it in `escaped`.
enum class EscapePolicy { Throw, Count };

struct ExpandedStateOptions {
    double step = 1e-3;             // Euler step (time units)
    double horizon = 50.0;          // simulated time per trial
    EscapePolicy on_escape = EscapePolicy::Throw;
    unsigned threads = 0;           // 0: hardware concurrency
};

struct ExpandedStateReport {
    double max_deviation = 0.0;     // max |p_t - manifold_p(x_t)| before ruin
    double mean_p_end = 0.0;        // E[p at horizon], ruined paths count as p = 1
    double mean_p_end_se = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t ruined = 0;
    std::uint64_t jumps = 0;
    std::uint64_t escaped = 0;      // paths stopped because p left (0, 1]
};

/// Simulates (x_t, p_t) under u*(x, p) with p' = manifold_p(x + 1) at jumps
/// and dp = (p - p') R_u dt between them. Throws NumericError if p leaves
/// (0, 1] unless opts.on_escape is Count.
ExpandedStateReport simulate_expanded_state(const QoeTarget& anchor, const HjbModel& model,
                                            std::uint64_t trials, std::uint64_t seed,
                                            const ExpandedStateOptions& opts = {});

} // namespace qoe
