#pragma once

// Closed-form quantities for a buffer fed by Poisson arrivals and drained at
// unit rate: the decay exponent of the ruin probability, single-server
// interruption bounds, and the (D, eps) feasibility region.

#include <string_view>

#include "qoe/errors.hpp"

namespace qoe {

/// Free / costly / combined Poisson packet rates, playback rate normalized to 1.
class ServerRates {
public:
    /// Throws DomainError unless r_free > 1 and r_costly > 0.
    ServerRates(double r_free, double r_costly);

    double free() const { return r_free_; }
    double costly() const { return r_costly_; }
    double both() const { return r_both_; }
    /// Rate in effect under action u (0 = free only, 1 = both servers).
    double under(int u) const { return u != 0 ? r_both_ : r_free_; }

private:
    double r_free_;
    double r_costly_;
    double r_both_;
};

/// Initial buffer D (packets) and interruption budget eps.
struct QoeTarget {
    double d;
    double eps;

    /// Throws DomainError unless d >= 0 and 0 < eps < 1.
    void validate() const;
};

struct DecayExponents {
    double alpha0;  // largest_root(R0)
    double alpha1;  // largest_root(R1)
    double beta;    // alpha1 / (alpha0 (1 - alpha0/2))
    double theta;   // alpha1 / alpha0

    static DecayExponents from(const ServerRates& rates);

    /// D-bar = (1/alpha1) log(beta/eps): the branch point of the risky design.
    double d_bar(double eps) const;
};

enum class Region { FreeOnlySufficient, Infeasible, Interior };

struct RegionClass {
    Region region;
    double d_min;  // (1/alpha1) log(1/eps)
    double d_max;  // (1/alpha0) log(1/eps)
};

std::string_view to_string(Region region);

/// gamma(r) = r + rate (e^{-r} - 1).
double gamma(double r, double rate);

/// Largest root of gamma(., rate). Throws DomainError for rate <= 1.
double largest_root(double rate);

/// e^{-rbar(rate) d}: interruption probability of a single server, F = infinity.
double interruption_prob_infinite(double d, double rate);

struct ProbabilityBounds {
    double lower;
    double upper;
};

/// Finite-file sandwich; the lower bound is clamped at zero.
ProbabilityBounds interruption_prob_bounds(double d, double rate, double file_size);

/// 2 exp(-(rate-1)^2 F / (4 (rate+1))): gap between the finite-file bounds.
double truncation_gap(double rate, double file_size);

/// Smallest F whose truncation gap is <= tol.
double truncation_horizon(double rate, double tol);

/// Closed boundaries: d == d_max is FreeOnlySufficient, d == d_min is Interior.
RegionClass classify(const QoeTarget& target, const ServerRates& rates);
RegionClass classify(const QoeTarget& target, const DecayExponents& exps);

} // namespace qoe
