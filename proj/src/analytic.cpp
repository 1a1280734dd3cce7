#include "qoe/analytic.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qoe {

namespace {

void require_rate_above_one(double rate, const char* who) {
    if (!(rate > 1.0) || !std::isfinite(rate)) {
        throw DomainError(std::string(who) + ": arrival rate must satisfy R > 1 (got " +
                          std::to_string(rate) + ")");
    }
}

double gap_exponent(double rate) {
    return (rate - 1.0) * (rate - 1.0) / (4.0 * (rate + 1.0));
}

} // namespace

ServerRates::ServerRates(double r_free, double r_costly)
    : r_free_(r_free), r_costly_(r_costly), r_both_(r_free + r_costly) {
    require_rate_above_one(r_free, "ServerRates");
    if (!(r_costly > 0.0) || !std::isfinite(r_costly)) {
        throw DomainError("ServerRates: costly rate must be positive");
    }
}

void QoeTarget::validate() const {
    if (!(d >= 0.0) || !std::isfinite(d)) {
        throw DomainError("QoeTarget: initial buffer must be a finite value >= 0");
    }
    if (!(eps > 0.0 && eps < 1.0)) {
        throw DomainError("QoeTarget: eps must lie in (0, 1)");
    }
}

DecayExponents DecayExponents::from(const ServerRates& rates) {
    DecayExponents e{};
    e.alpha0 = largest_root(rates.free());
    e.alpha1 = largest_root(rates.both());
    e.beta = e.alpha1 / (e.alpha0 * (1.0 - e.alpha0 / 2.0));
    e.theta = e.alpha1 / e.alpha0;
    return e;
}

double DecayExponents::d_bar(double eps) const {
    return std::log(beta / eps) / alpha1;
}

std::string_view to_string(Region region) {
    switch (region) {
    case Region::FreeOnlySufficient: return "free_only_sufficient";
    case Region::Infeasible: return "infeasible";
    case Region::Interior: return "interior";
    }
    return "unknown";
}

double gamma(double r, double rate) {
    return r + rate * (std::exp(-r) - 1.0);
}

double largest_root(double rate) {
    require_rate_above_one(rate, "largest_root");
    // expm1 keeps the sign of gamma reliable near r = 0, where the bracket starts.
    auto g = [rate](double r) { return r + rate * std::expm1(-r); };

    // gamma is convex, zero at 0 and negative just to its right, so every
    // point left of the largest root is negative.
    double lo = 0.0;
    double hi = 1.0;
    while (g(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double r = 0.5 * (lo + hi);
    const double slope = 1.0 - rate * std::exp(-r);
    if (slope > 0.0) {
        const double polished = r - g(r) / slope;
        if (polished > lo && polished < hi) r = polished;
    }
    return r;
}

double interruption_prob_infinite(double d, double rate) {
    require_rate_above_one(rate, "interruption_prob_infinite");
    if (!(d >= 0.0)) throw DomainError("interruption_prob_infinite: d must be >= 0");
    return std::exp(-largest_root(rate) * d);
}

double truncation_gap(double rate, double file_size) {
    require_rate_above_one(rate, "truncation_gap");
    return 2.0 * std::exp(-gap_exponent(rate) * file_size);
}

ProbabilityBounds interruption_prob_bounds(double d, double rate, double file_size) {
    require_rate_above_one(rate, "interruption_prob_bounds");
    if (!(d >= 0.0)) throw DomainError("interruption_prob_bounds: d must be >= 0");
    if (!(file_size > 0.0)) throw DomainError("interruption_prob_bounds: file size must be > 0");
    const double upper = std::exp(-largest_root(rate) * d);
    const double gap = std::isinf(file_size) ? 0.0 : truncation_gap(rate, file_size);
    return {std::max(0.0, upper - gap), upper};
}

double truncation_horizon(double rate, double tol) {
    require_rate_above_one(rate, "truncation_horizon");
    if (!(tol > 0.0)) throw DomainError("truncation_horizon: tol must be > 0");
    if (tol >= 2.0) return 0.0;
    return std::log(2.0 / tol) / gap_exponent(rate);
}

RegionClass classify(const QoeTarget& target, const DecayExponents& exps) {
    target.validate();
    const double log_inv_eps = std::log(1.0 / target.eps);
    RegionClass rc{Region::Interior, log_inv_eps / exps.alpha1, log_inv_eps / exps.alpha0};
    if (target.d >= rc.d_max) {
        rc.region = Region::FreeOnlySufficient;
    } else if (target.d < rc.d_min) {
        rc.region = Region::Infeasible;
    }
    return rc;
}

RegionClass classify(const QoeTarget& target, const ServerRates& rates) {
    return classify(target, DecayExponents::from(rates));
}

} // namespace qoe
