#pragma once

// Experiment sweeps over the initial buffer and their CSV / metadata output.
//
//   fig1.csv  D,T_star,D_bar_flag
//   fig2.csv  D,policy,analytic_cost_time,analytic_is_bound,mc_cost_time,mc_cost_lo,
//             mc_cost_hi,mc_p_hat,mc_p_lo,mc_p_hi,costly_packets_mean
//   hjb.csv   x,p,lhs,rhs,residual,argmin_u,in_exact_zone
//
// Numbers carry 9 significant digits. Infeasible entries are written "inf";
// NaN is never written.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qoe/engine.hpp"
#include "qoe/hjb.hpp"

namespace qoe {

struct ExperimentConfig {
    double r0 = 1.05;
    double rc = 0.15;
    double eps = 1e-3;
    double d_min = 18.5;
    double d_max = 70.0;
    double d_step = 0.5;
    std::vector<std::string> policies{"offline", "safe", "risky"};
    std::uint64_t trials = kDefaultTrials;
    std::uint64_t seed = 1;
    std::optional<double> file_size;  // nullopt = auto
    double truncation_tol = kDefaultTruncationTol;
    std::filesystem::path output = ".";
    unsigned threads = 0;

    /// Throws DomainError: bad rates/eps, empty policy set, unknown family, step <= 0.
    void validate() const;
    ServerRates rates() const { return ServerRates(r0, rc); }
};

/// d_min, d_min + step, ... up to d_max (inclusive within a 1e-9 step slack).
std::vector<double> d_grid(double d_min, double d_max, double step);

struct Fig1Row {
    double d;
    double t_star;     // +inf where the target is infeasible
    int d_bar_flag;    // 1 where D >= D-bar (upper design branch)
};

std::vector<Fig1Row> fig1_rows(const ExperimentConfig& cfg);

struct Fig2Row {
    double d;
    std::string policy;
    double analytic_cost_time;  // +inf if infeasible
    bool analytic_is_bound;
    bool simulated;             // false: MC columns render as inf
    McEstimate mc;
};

/// One row per (D, policy), sorted by D then by the configured policy order.
std::vector<Fig2Row> fig2_rows(const ExperimentConfig& cfg);

/// %.9g, "inf"/"-inf" for infinities. Throws NumericError on NaN.
std::string format_number(double v);

void write_fig1_csv(std::ostream& os, const std::vector<Fig1Row>& rows);
void write_fig2_csv(std::ostream& os, const std::vector<Fig2Row>& rows);
void write_hjb_csv(std::ostream& os, const std::vector<HjbResidualReport>& rows);

inline constexpr const char* kFig1Header = "D,T_star,D_bar_flag";
inline constexpr const char* kFig2Header =
    "D,policy,analytic_cost_time,analytic_is_bound,mc_cost_time,mc_cost_lo,mc_cost_hi,"
    "mc_p_hat,mc_p_lo,mc_p_hi,costly_packets_mean";
inline constexpr const char* kHjbHeader = "x,p,lhs,rhs,residual,argmin_u,in_exact_zone";

/// Provenance sidecar (JSON) written next to a CSV as <csv>.meta.json.
void write_sweep_metadata(const std::filesystem::path& csv_path, const ExperimentConfig& cfg,
                          const std::string& figure);

} // namespace qoe
