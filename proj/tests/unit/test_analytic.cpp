#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "qoe/analytic.hpp"

using namespace qoe;
using doctest::Approx;

// Reference values computed once with 50-digit mpmath and frozen here.
namespace ref {
constexpr double alpha0 = 0.0983869289265467;  // R = 1.05
constexpr double alpha1 = 0.376437997249461;   // R = 1.2
constexpr double beta = 4.02405484594052;
constexpr double theta = 3.82609764687849;
constexpr double d_min = 18.3503135428819;     // eps = 1e-3
constexpr double d_max = 70.2100914659029;
constexpr double d_bar = 22.0489042074391;
} // namespace ref

TEST_CASE("gamma is the literal formula") {
    CHECK(gamma(0.0, 1.7) == 0.0);
    CHECK(gamma(1.0, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(std::abs(gamma(0.376, 1.2)) < 1e-4);
}

TEST_CASE("largest_root agrees with the bisection oracle") {
    for (double rate : {1.01, 1.05, 1.1, 1.2, 1.5, 2.0, 3.0, 5.0}) {
        CAPTURE(rate);
        const double r = largest_root(rate);
        CHECK(r == Approx(oracle::root(rate)).epsilon(1e-12));
        CHECK(std::abs(gamma(r, rate)) < 1e-12);
        CHECK(gamma(r * (1.0 + 1e-6), rate) > 0.0);
        CHECK(gamma(r * (1.0 - 1e-6), rate) < 0.0);
    }
    CHECK(largest_root(1.05) == Approx(ref::alpha0).epsilon(1e-13));
    CHECK(largest_root(1.2) == Approx(ref::alpha1).epsilon(1e-13));
    CHECK(largest_root(1.5) == Approx(0.874217466).epsilon(1e-9));
    CHECK(largest_root(2.0) == Approx(1.59362426).epsilon(1e-8));
}

TEST_CASE("largest_root is strictly increasing and satisfies the root identity on a grid") {
    double prev = 0.0;
    for (double rate = 1.01; rate <= 5.0; rate += 0.01) {
        const double r = largest_root(rate);
        CHECK(std::abs(gamma(r, rate)) < 1e-10);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("rates at or below playback speed are rejected") {
    CHECK_THROWS_AS(largest_root(1.0), DomainError);
    CHECK_THROWS_AS(largest_root(0.9), DomainError);
    CHECK_THROWS_AS(largest_root(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(ServerRates(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(ServerRates(1.1, 0.0), DomainError);
    CHECK_THROWS_AS(ServerRates(1.1, -1.0), DomainError);
    CHECK_THROWS_WITH_AS(largest_root(0.9), doctest::Contains("R > 1"), DomainError);
}

TEST_CASE("ServerRates and DecayExponents") {
    const ServerRates rates(1.05, 0.15);
    CHECK(rates.both() == 1.05 + 0.15);
    CHECK(rates.under(0) == 1.05);
    CHECK(rates.under(1) == rates.both());

    const auto e = DecayExponents::from(rates);
    CHECK(e.alpha0 == Approx(ref::alpha0).epsilon(1e-13));
    CHECK(e.alpha1 == Approx(ref::alpha1).epsilon(1e-13));
    CHECK(e.beta == Approx(ref::beta).epsilon(1e-12));
    CHECK(e.theta == Approx(ref::theta).epsilon(1e-12));
    CHECK(e.d_bar(1e-3) == Approx(ref::d_bar).epsilon(1e-12));

    for (double r0 : {1.01, 1.1, 1.5, 1.9}) {
        for (double rc : {0.01, 0.3, 2.0}) {
            const auto x = DecayExponents::from(ServerRates(r0, rc));
            CHECK(x.alpha0 < x.alpha1);
            CHECK(x.beta >= x.theta);
            CHECK(x.theta > 1.0);
        }
    }
}

TEST_CASE("interruption probability, bounds and horizon") {
    CHECK(interruption_prob_infinite(0.0, 1.3) == 1.0);
    CHECK(interruption_prob_infinite(10.0, 1.2) == Approx(0.023182).epsilon(1e-4));
    CHECK(interruption_prob_infinite(70.0, 1.05) == Approx(1.0e-3).epsilon(0.05));
    CHECK_THROWS_AS(interruption_prob_infinite(-1.0, 1.2), DomainError);

    // (R - 1)^2 / (4 (R + 1)) = 0.04 / 8.8 at R = 1.2.
    CHECK(truncation_gap(1.2, 2500.0) == Approx(2.0 * std::exp(-0.04 * 2500.0 / 8.8)).epsilon(1e-12));
    CHECK(truncation_gap(1.2, 2500.0) < 3e-5);

    CHECK(truncation_horizon(1.2, 1e-4) == Approx(2178.76726155795).epsilon(1e-12));
    CHECK(std::abs(truncation_horizon(1.2, 1e-4) - 2180.0) <= 2.0);
    CHECK(truncation_horizon(1.05, 1e-4) == Approx(4.0 * 2.05 / (0.05 * 0.05) * std::log(2e4)).epsilon(1e-12));
    CHECK(truncation_horizon(1.05, 1e-4) == Approx(32483.44).epsilon(1e-6));
    CHECK(truncation_horizon(1.3, 2.0) == 0.0);
    CHECK(truncation_horizon(1.3, 5.0) == 0.0);
    CHECK(truncation_gap(1.2, truncation_horizon(1.2, 1e-4)) == Approx(1e-4).epsilon(1e-9));

    const auto b = interruption_prob_bounds(10.0, 1.2, 2500.0);
    CHECK(b.upper == interruption_prob_infinite(10.0, 1.2));
    CHECK(b.lower == Approx(b.upper - truncation_gap(1.2, 2500.0)).epsilon(1e-12));
    CHECK(b.lower <= b.upper);

    const auto small = interruption_prob_bounds(30.0, 1.2, 10.0);
    CHECK(small.lower == 0.0);

    const auto inf = interruption_prob_bounds(10.0, 1.2, std::numeric_limits<double>::infinity());
    CHECK(inf.lower == inf.upper);
    CHECK(interruption_prob_bounds(0.0, 1.7, 100.0).upper == 1.0);
}

TEST_CASE("classify uses closed boundaries") {
    const ServerRates rates(1.05, 0.15);
    const auto c = classify(QoeTarget{20.0, 1e-3}, rates);
    CHECK(c.region == Region::Interior);
    CHECK(c.d_min == Approx(ref::d_min).epsilon(1e-12));
    CHECK(c.d_max == Approx(ref::d_max).epsilon(1e-12));

    CHECK(classify(QoeTarget{c.d_min, 1e-3}, rates).region == Region::Interior);
    CHECK(classify(QoeTarget{std::nextafter(c.d_min, 0.0), 1e-3}, rates).region == Region::Infeasible);
    CHECK(classify(QoeTarget{c.d_max, 1e-3}, rates).region == Region::FreeOnlySufficient);
    CHECK(classify(QoeTarget{c.d_max + 1.0, 1e-3}, rates).region == Region::FreeOnlySufficient);
    CHECK(classify(QoeTarget{0.0, 0.5}, rates).region == Region::Infeasible);

    CHECK(to_string(Region::Interior) == "interior");
}

TEST_CASE("QoeTarget validation") {
    CHECK_NOTHROW((QoeTarget{0.0, 0.5}.validate()));
    CHECK_THROWS_AS((QoeTarget{-1.0, 0.5}.validate()), DomainError);
    CHECK_THROWS_AS((QoeTarget{1.0, 0.0}.validate()), DomainError);
    CHECK_THROWS_AS((QoeTarget{1.0, 1.0}.validate()), DomainError);
    CHECK_THROWS_AS((QoeTarget{std::numeric_limits<double>::infinity(), 0.1}.validate()), DomainError);
}
