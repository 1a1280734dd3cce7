#pragma once

// Test-side reference computations. Written independently of the library:
// plain long-double bisection and direct transcriptions of the closed forms,
// without expm1 or Newton steps.

#include <cmath>

namespace oracle {

inline long double gamma(long double r, long double rate) { return r + rate * (std::exp(-r) - 1.0L); }

/// Largest root of r + R(e^{-r} - 1). gamma < 0 at (R-1)/R and > 0 at R.
inline double root(double rate) {
    long double lo = (rate - 1.0L) / rate;
    long double hi = rate;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        (gamma(mid, rate) < 0.0L ? lo : hi) = mid;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

struct Exps {
    long double a0, a1, beta, theta;
};

inline Exps exps(double r0, double rc) {
    const long double a0 = root(r0);
    const long double a1 = root(r0 + rc);
    return {a0, a1, a1 / (a0 * (1.0L - a0 / 2.0L)), a1 / a0};
}

inline double safe_level(double d, double eps, double r0, double rc) {
    const Exps e = exps(r0, rc);
    return static_cast<double>(std::log(1.0L / (eps - std::exp(-e.a1 * d))) / e.a0);
}

inline double risky_threshold(double d, double eps, double r0, double rc) {
    const Exps e = exps(r0, rc);
    const long double dbar = std::log(e.beta / eps) / e.a1;
    if (d >= dbar) return static_cast<double>((std::log(e.beta / eps) - e.a0 * d) / (e.a1 - e.a0));
    const long double tail = std::exp(-e.a1 * d);
    return static_cast<double>(std::log((eps + e.beta * (1.0L - tail) - 1.0L) / (eps - tail)) / e.a1);
}

inline double risky_bound(double d, double eps, double r0, double rc) {
    const Exps e = exps(r0, rc);
    const long double drift = r0 + rc - 1.0L;
    const long double dbar = std::log(e.beta / eps) / e.a1;
    const long double t = risky_threshold(d, eps, r0, rc);
    if (d >= dbar) return static_cast<double>(e.beta / (e.a1 * drift) * std::exp(-e.a0 * (d - t)));
    const long double reach = (1.0L - std::exp(-e.a1 * d)) / (1.0L - std::exp(-e.a1 * t));
    return static_cast<double>(reach / drift * (t + 1.0L + e.beta / e.a1) - d / drift);
}

} // namespace oracle
