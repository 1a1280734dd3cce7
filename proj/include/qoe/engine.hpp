#pragma once

// Exact event-driven simulation of the controlled buffer
//
//     x_t = D + N_t + int_0^t u dN^c - t
//
// and Monte Carlo estimates of interruption probability and costly usage.
//
// Between events the buffer drains at unit rate. Events are Poisson arrivals
// at the rate of the current action, policy boundaries (offline switch time,
// risky threshold reached from above), ruin (x drains to 0) and completion
// (D + arrivals reaches the file size). At a boundary the pending
// inter-arrival time is discarded and redrawn at the new rate. When an
// arrival and a boundary coincide the boundary is processed first, ruin ahead
// of any policy boundary.

#include <cstdint>
#include <optional>

#include "qoe/analytic.hpp"
#include "qoe/policy.hpp"
#include "qoe/rng.hpp"

namespace qoe {

inline constexpr double kDefaultTruncationTol = 1e-4;
inline constexpr std::uint64_t kDefaultTrials = 100000;

struct SimConfig {
    ServerRates rates;
    QoeTarget target;
    PolicySpec spec;
    /// Packets in the file; nullopt means "auto" = truncation_horizon(R0, truncation_tol).
    std::optional<double> file_size;
    std::uint64_t trials = kDefaultTrials;
    std::uint64_t master_seed = 0;
    double truncation_tol = kDefaultTruncationTol;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;

    /// Throws DomainError on violated invariants.
    void validate() const;
    double resolved_file_size() const;
};

struct TrajectoryOutcome {
    bool interrupted = false;
    double stop_time = 0.0;      // min(tau_e, tau_f)
    double cost_time = 0.0;      // time spent with u = 1 before stop_time
    std::uint64_t costly_packets = 0;
    std::uint64_t arrivals = 0;
    double final_buffer = 0.0;
};

/// One trajectory. `file_size` is the resolved (finite) size.
TrajectoryOutcome simulate_trajectory(const ServerRates& rates, double d, const PolicySpec& spec,
                                      double file_size, TrialStreams& streams);

struct Interval {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double std_error = 0.0;
};

struct McEstimate {
    Interval p_hat;         // Wilson 95%
    Interval cost_time;     // Student-t 95%, clamped at 0
    Interval costly_packets;
    std::uint64_t n = 0;
    std::uint64_t interruptions = 0;
    double file_size = 0.0;
    /// Truncation gap at the simulated file size: how far the finite-file
    /// interruption probability can sit below the infinite-file value.
    double truncation_bias_bound = 0.0;
};

McEstimate estimate(const SimConfig& config);

/// Wilson score interval at ~95% (z = 1.96).
Interval wilson_interval(std::uint64_t successes, std::uint64_t n);

/// Student-t 95% interval for a mean from running sums.
Interval mean_interval(double sum, double sum_sq, std::uint64_t n);

struct FirstPassageStats {
    std::uint64_t n = 0;
    double prob_reach = 0.0;       // P(tau_T < tau_e)
    double prob_reach_se = 0.0;
    double mean_overshoot = 0.0;   // E[x_tau - T | reach]
    double mean_time = 0.0;        // E[min(tau_e, tau_T)]
    double mean_time_se = 0.0;
    double mean_stop_level = 0.0;  // E[x at min(tau_e, tau_T)]
    /// Per-trial d + (R - 1) tau - x_tau has mean zero by optional stopping.
    double martingale_residual = 0.0;
    double martingale_residual_se = 0.0;
};

/// Single server of the given rate from d until x >= threshold or x <= 0.
FirstPassageStats first_passage_stats(double d, double threshold, double rate, std::uint64_t trials,
                                      std::uint64_t seed);

} // namespace qoe
