#include <doctest.h>

#include <cmath>
#include <cstring>

#include "qoe/engine.hpp"
#include "qoe/kernels/exp_variates.hpp"

using namespace qoe;
using doctest::Approx;

namespace {

bool same(const Interval& a, const Interval& b) {
    return std::memcmp(&a, &b, sizeof(Interval)) == 0;
}

bool same(const McEstimate& a, const McEstimate& b) {
    return same(a.p_hat, b.p_hat) && same(a.cost_time, b.cost_time) && same(a.costly_packets, b.costly_packets) &&
           a.n == b.n && a.interruptions == b.interruptions && a.file_size == b.file_size;
}

bool same(const TrajectoryOutcome& a, const TrajectoryOutcome& b) {
    return a.interrupted == b.interrupted && a.stop_time == b.stop_time && a.cost_time == b.cost_time &&
           a.costly_packets == b.costly_packets && a.arrivals == b.arrivals && a.final_buffer == b.final_buffer;
}

// Fast regime: R0 = 1.5 gives a horizon of a few hundred packets.
const ServerRates kFast(1.5, 0.5);

} // namespace

TEST_CASE("Wilson and Student-t intervals") {
    const auto w = wilson_interval(10, 100);
    CHECK(w.point == 0.1);
    CHECK(w.lo == Approx(0.05523).epsilon(1e-3));
    CHECK(w.hi == Approx(0.17437).epsilon(1e-3));
    const auto z = wilson_interval(0, 1000);
    CHECK(z.lo == 0.0);
    CHECK(z.hi > 0.0);

    double sum = 0.0, sq = 0.0;
    for (int i = 1; i <= 10; ++i) {
        sum += i;
        sq += i * i;
    }
    const auto m = mean_interval(sum, sq, 10);
    CHECK(m.point == Approx(5.5));
    CHECK(m.lo == Approx(3.33415).epsilon(1e-5));
    CHECK(m.hi == Approx(7.66585).epsilon(1e-5));

    const auto one = mean_interval(4.0, 16.0, 1);
    CHECK(one.lo == 0.0);
    CHECK(std::isinf(one.hi));

    // Clamped at zero.
    CHECK(mean_interval(1.0, 1.0, 10).lo == 0.0);
}

TEST_CASE("SimConfig validation") {
    SimConfig c{kFast, {5.0, 1e-3}, policies::FreeOnly{}, 4.0, 10, 1};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.file_size = 100.0;
    CHECK_NOTHROW(c.validate());
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.trials = 10;
    c.spec = policies::Risky{-2.0};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.spec = policies::FreeOnly{};
    c.file_size.reset();
    CHECK(c.resolved_file_size() == truncation_horizon(1.5, kDefaultTruncationTol));
}

TEST_CASE("degenerate trajectories") {
    TrialStreams s(1, 0);
    const auto ruined = simulate_trajectory(kFast, 0.0, policies::FreeOnly{}, 100.0, s);
    CHECK(ruined.interrupted);
    CHECK(ruined.stop_time == 0.0);

    TrialStreams s2(1, 0);
    const auto done = simulate_trajectory(kFast, 10.0, policies::FreeOnly{}, 10.0, s2);
    CHECK_FALSE(done.interrupted);
    CHECK(done.stop_time == 0.0);
    CHECK(done.arrivals == 0);
}

TEST_CASE("BothAlways charges its whole lifetime") {
    for (std::uint64_t i = 0; i < 2000; ++i) {
        TrialStreams s(7, i);
        const auto o = simulate_trajectory(kFast, 3.0, policies::BothAlways{}, 200.0, s);
        REQUIRE(o.cost_time == o.stop_time);
    }
}

TEST_CASE("parameter extremes reduce to the fixed policies") {
    for (std::uint64_t i = 0; i < 500; ++i) {
        auto run = [&](const PolicySpec& p) {
            TrialStreams s(9, i);
            return simulate_trajectory(kFast, 4.0, p, 300.0, s);
        };
        const auto free_only = run(policies::FreeOnly{});
        const auto both = run(policies::BothAlways{});
        REQUIRE(same(run(policies::Risky{0.0}), free_only));
        REQUIRE(same(run(policies::Offline{0.0}), free_only));
        REQUIRE(same(run(policies::Safe{4.0}), free_only));
        REQUIRE(same(run(policies::Risky{1e9}), both));
        REQUIRE(same(run(policies::Safe{1e9}), both));
    }
}

TEST_CASE("offline usage stops at the switch time") {
    for (std::uint64_t i = 0; i < 2000; ++i) {
        TrialStreams s(3, i);
        const auto o = simulate_trajectory(kFast, 5.0, policies::Offline{2.5}, 300.0, s);
        // t + (t_s - t) may round one ulp away from t_s.
        REQUIRE(o.cost_time <= 2.5 + 1e-12);
        REQUIRE(o.cost_time == Approx(std::min(2.5, o.stop_time)).epsilon(1e-12));
    }
}

TEST_CASE("estimate is deterministic across thread counts and kernels") {
    SimConfig c{kFast, {5.0, 1e-3}, policies::Risky{6.0}, std::nullopt, 5000, 77};
    c.threads = 1;
    const auto one = estimate(c);
    c.threads = 3;
    const auto three = estimate(c);
    CHECK(same(one, three));

    const auto saved = kernels::active_isa();
    kernels::select_isa(kernels::Isa::Scalar);
    const auto scalar = estimate(c);
    kernels::select_isa(saved);
    CHECK(same(one, scalar));

    c.master_seed = 78;
    CHECK_FALSE(same(one, estimate(c)));
}

TEST_CASE("free-only interruption frequency matches exp(-rbar D)") {
    for (double rate : {1.5, 2.0}) {
        const ServerRates rates(rate, 0.1);
        SimConfig c{rates, {5.0, 0.5}, policies::FreeOnly{}, std::nullopt, 100000, 11};
        const auto mc = estimate(c);
        const double want = interruption_prob_infinite(5.0, rate);
        const double sigma = std::sqrt(want * (1.0 - want) / 100000.0);
        CAPTURE(rate);
        CHECK(mc.p_hat.point >= want - kDefaultTruncationTol - 4.0 * sigma);
        CHECK(mc.p_hat.point <= want + 4.0 * sigma);
        CHECK(mc.truncation_bias_bound == Approx(kDefaultTruncationTol).epsilon(1e-9));
    }
}

TEST_CASE("safe cost and thinning") {
    const QoeTarget target{5.0, 1e-3};
    const double level = safe_threshold(target, kFast);
    const auto analytic = safe_cost(target, kFast);
    SimConfig c{kFast, target, policies::Safe{level}, std::nullopt, 100000, 5};
    const auto mc = estimate(c);
    const double se = mc.cost_time.std_error;
    CHECK(mc.cost_time.point >= analytic.expected_cost_time - 3.0 * se);
    CHECK(mc.cost_time.point <= analytic.expected_cost_time + analytic.overshoot_band + 3.0 * se);
    CHECK(mc.p_hat.point <= target.eps + 4.0 * std::sqrt(target.eps / 100000.0));

    // Each costly-phase arrival is charged with probability Rc/R1.
    const double want = kFast.costly() * mc.cost_time.point;
    const double spread = std::hypot(mc.costly_packets.std_error, kFast.costly() * se);
    CHECK(std::abs(mc.costly_packets.point - want) <= 3.0 * spread);
}

TEST_CASE("first passage statistics") {
    const auto now = first_passage_stats(5.0, 5.0, 1.2, 10, 1);
    CHECK(now.prob_reach == 1.0);
    CHECK(now.mean_time == 0.0);

    CHECK_THROWS_AS(first_passage_stats(6.0, 5.0, 1.2, 10, 1), DomainError);
    CHECK_THROWS_AS(first_passage_stats(1.0, 5.0, 1.0, 10, 1), DomainError);

    const auto st = first_passage_stats(10.0, 23.2, 1.2, 100000, 3);
    CHECK(st.mean_overshoot >= 0.0);
    CHECK(st.mean_overshoot < 1.0);
    CHECK(std::abs(st.martingale_residual) < 3.0 * st.martingale_residual_se);
    const auto iv = stopping_prob_interval(10.0, 23.2, 1.2);
    CHECK(st.prob_reach >= iv.lo - 3.0 * st.prob_reach_se);
    CHECK(st.prob_reach <= iv.hi + 3.0 * st.prob_reach_se);
}
