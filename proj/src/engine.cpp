#include "qoe/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "parallel.hpp"

namespace qoe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZ95 = 1.959963984540054;
constexpr std::uint64_t kBlockTrials = 1024;

// Policy hooks for the event loop. Each controller answers: the action at
// t = 0, the time until its next deterministic boundary, the action after
// that boundary, and the action after an arrival has lifted the buffer to x.
struct FreeOnlyCtl {
    int initial(double) const { return 0; }
    double boundary(int, double, double) const { return kInf; }
    int on_boundary(int u) const { return u; }
    int after_arrival(int, double) const { return 0; }
};

struct BothAlwaysCtl {
    int initial(double) const { return 1; }
    double boundary(int, double, double) const { return kInf; }
    int on_boundary(int u) const { return u; }
    int after_arrival(int, double) const { return 1; }
};

struct OfflineCtl {
    double switch_time;
    int initial(double) const { return switch_time > 0.0 ? 1 : 0; }
    double boundary(int u, double t, double) const { return u == 1 ? switch_time - t : kInf; }
    int on_boundary(int) const { return 0; }
    int after_arrival(int u, double) const { return u; }
};

// The latch is the action itself: once u drops to 0 it never returns to 1.
struct SafeCtl {
    double level;
    int initial(double d) const { return d >= level ? 0 : 1; }
    double boundary(int, double, double) const { return kInf; }
    int on_boundary(int u) const { return u; }
    int after_arrival(int u, double x) const { return (u == 1 && x < level) ? 1 : 0; }
};

struct RiskyCtl {
    double threshold;
    int initial(double d) const { return (d > 0.0 && d < threshold) ? 1 : 0; }
    // Draining from above reaches the threshold after x - T.
    double boundary(int u, double, double x) const { return u == 0 ? x - threshold : kInf; }
    int on_boundary(int) const { return 1; }
    int after_arrival(int, double x) const { return x < threshold ? 1 : 0; }
};

std::uint64_t arrivals_to_complete(double d, double file_size) {
    if (!(file_size > d)) return 0;
    return static_cast<std::uint64_t>(std::ceil(file_size - d));
}

template <class Ctl>
TrajectoryOutcome run(const Ctl& ctl, const ServerRates& rates, double d, double file_size,
                      TrialStreams& streams) {
    TrajectoryOutcome out;
    const std::uint64_t needed = arrivals_to_complete(d, file_size);
    if (needed == 0) {
        out.final_buffer = d;
        return out;
    }
    const double inv_rate[2] = {1.0 / rates.free(), 1.0 / rates.both()};
    const double costly_share = rates.costly() / rates.both();

    double x = d;
    double t = 0.0;
    double cost = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t costly = 0;
    int u = ctl.initial(d);

    // The inner loop runs at a fixed action, so the rate never depends on the
    // freshly updated buffer through data flow; a change of action leaves it.
    bool done = false;
    while (!done) {
        const double inv = inv_rate[u];
        for (;;) {
            const double gap = streams.arrivals.next() * inv;
            const double b = ctl.boundary(u, t, x);
            if (x <= gap && x <= b) {
                t += x;
                if (u == 1) cost += x;
                x = 0.0;
                out.interrupted = true;
                done = true;
                break;
            }
            if (b <= gap) {
                t += b;
                x -= b;
                if (u == 1) cost += b;
                u = ctl.on_boundary(u);
                break;
            }
            t += gap;
            x += 1.0 - gap;
            ++arrivals;
            if (u == 1) {
                cost += gap;
                if (streams.thinning.next() < costly_share) ++costly;
            }
            if (arrivals >= needed) {
                done = true;
                break;
            }
            const int next = ctl.after_arrival(u, x);
            if (next != u) {
                u = next;
                break;
            }
        }
    }

    out.stop_time = t;
    out.cost_time = cost;
    out.costly_packets = costly;
    out.arrivals = arrivals;
    out.final_buffer = x;
    return out;
}

struct Sums {
    std::uint64_t n = 0;
    std::uint64_t interruptions = 0;
    double cost = 0.0;
    double cost_sq = 0.0;
    double packets = 0.0;
    double packets_sq = 0.0;

    void add(const TrajectoryOutcome& o) {
        ++n;
        interruptions += o.interrupted ? 1 : 0;
        cost += o.cost_time;
        cost_sq += o.cost_time * o.cost_time;
        const double k = static_cast<double>(o.costly_packets);
        packets += k;
        packets_sq += k * k;
    }
    void merge(const Sums& s) {
        n += s.n;
        interruptions += s.interruptions;
        cost += s.cost;
        cost_sq += s.cost_sq;
        packets += s.packets;
        packets_sq += s.packets_sq;
    }
};

} // namespace

void SimConfig::validate() const {
    target.validate();
    qoe::validate(spec);
    if (trials < 1) throw DomainError("SimConfig: trials must be >= 1");
    if (!(truncation_tol > 0.0 && truncation_tol < 1.0)) {
        throw DomainError("SimConfig: truncation tolerance must lie in (0, 1)");
    }
    if (file_size && !(*file_size > target.d && std::isfinite(*file_size))) {
        throw DomainError("SimConfig: a finite file size must exceed the initial buffer");
    }
}

double SimConfig::resolved_file_size() const {
    return file_size ? *file_size : truncation_horizon(rates.free(), truncation_tol);
}

TrajectoryOutcome simulate_trajectory(const ServerRates& rates, double d, const PolicySpec& spec,
                                      double file_size, TrialStreams& streams) {
    return std::visit(
        [&](const auto& p) -> TrajectoryOutcome {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, policies::FreeOnly>) {
                return run(FreeOnlyCtl{}, rates, d, file_size, streams);
            } else if constexpr (std::is_same_v<P, policies::BothAlways>) {
                return run(BothAlwaysCtl{}, rates, d, file_size, streams);
            } else if constexpr (std::is_same_v<P, policies::Offline>) {
                return run(OfflineCtl{p.switch_time}, rates, d, file_size, streams);
            } else if constexpr (std::is_same_v<P, policies::Safe>) {
                return run(SafeCtl{p.level}, rates, d, file_size, streams);
            } else {
                // A non-positive threshold never binds.
                if (!(p.threshold > 0.0)) return run(FreeOnlyCtl{}, rates, d, file_size, streams);
                return run(RiskyCtl{p.threshold}, rates, d, file_size, streams);
            }
        },
        spec);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t n) {
    Interval iv;
    if (n == 0) return {0.0, 0.0, 1.0, 0.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    iv.point = p;
    iv.lo = std::clamp(center - half, 0.0, p);
    iv.hi = std::clamp(center + half, p, 1.0);
    iv.std_error = std::sqrt(p * (1.0 - p) / nn);
    return iv;
}

Interval mean_interval(double sum, double sum_sq, std::uint64_t n) {
    Interval iv;
    if (n == 0) return {0.0, 0.0, kInf, kInf};
    const double nn = static_cast<double>(n);
    iv.point = sum / nn;
    if (n == 1) {
        iv.lo = 0.0;
        iv.hi = kInf;
        iv.std_error = kInf;
        return iv;
    }
    const double var = std::max(0.0, (sum_sq - sum * sum / nn) / (nn - 1.0));
    iv.std_error = std::sqrt(var / nn);
    const boost::math::students_t dist(nn - 1.0);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    iv.lo = std::max(0.0, iv.point - q * iv.std_error);
    iv.hi = iv.point + q * iv.std_error;
    return iv;
}

McEstimate estimate(const SimConfig& config) {
    config.validate();
    const double file_size = config.resolved_file_size();
    const std::uint64_t blocks = (config.trials + kBlockTrials - 1) / kBlockTrials;
    std::vector<Sums> partial(blocks);

    detail::for_each_block(blocks, config.threads, [&](std::uint64_t b) {
        Sums s;
        const std::uint64_t first = b * kBlockTrials;
        const std::uint64_t last = std::min(config.trials, first + kBlockTrials);
        for (std::uint64_t i = first; i < last; ++i) {
            TrialStreams streams(config.master_seed, i);
            s.add(simulate_trajectory(config.rates, config.target.d, config.spec, file_size, streams));
        }
        partial[b] = s;
    });

    Sums total;
    for (const Sums& s : partial) total.merge(s);

    McEstimate est;
    est.n = total.n;
    est.interruptions = total.interruptions;
    est.p_hat = wilson_interval(total.interruptions, total.n);
    est.cost_time = mean_interval(total.cost, total.cost_sq, total.n);
    est.costly_packets = mean_interval(total.packets, total.packets_sq, total.n);
    est.file_size = file_size;
    est.truncation_bias_bound = truncation_gap(config.rates.free(), file_size);
    return est;
}

FirstPassageStats first_passage_stats(double d, double threshold, double rate, std::uint64_t trials,
                                      std::uint64_t seed) {
    if (!(rate > 1.0)) throw DomainError("first_passage_stats: rate must satisfy R > 1");
    if (!(d > 0.0 && d <= threshold)) throw DomainError("first_passage_stats: need 0 < d <= threshold");
    if (trials < 1) throw DomainError("first_passage_stats: trials must be >= 1");

    FirstPassageStats st;
    st.n = trials;
    if (d >= threshold) {
        st.prob_reach = 1.0;
        st.mean_stop_level = d;
        st.martingale_residual = 0.0;
        return st;
    }

    const double inv_rate = 1.0 / rate;
    std::uint64_t reached = 0;
    double overshoot_sum = 0.0;
    double time_sum = 0.0, time_sq = 0.0;
    double level_sum = 0.0;
    double resid_sum = 0.0, resid_sq = 0.0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        TrialStreams streams(seed, i);
        double x = d;
        double t = 0.0;
        for (;;) {
            const double gap = streams.arrivals.next() * inv_rate;
            if (x <= gap) {
                t += x;
                x = 0.0;
                break;
            }
            t += gap;
            x += 1.0 - gap;
            if (x >= threshold) {
                ++reached;
                overshoot_sum += x - threshold;
                break;
            }
        }
        time_sum += t;
        time_sq += t * t;
        level_sum += x;
        const double resid = d + (rate - 1.0) * t - x;
        resid_sum += resid;
        resid_sq += resid * resid;
    }
    const double n = static_cast<double>(trials);
    st.prob_reach = static_cast<double>(reached) / n;
    st.prob_reach_se = std::sqrt(st.prob_reach * (1.0 - st.prob_reach) / n);
    st.mean_overshoot = reached > 0 ? overshoot_sum / static_cast<double>(reached) : 0.0;
    const Interval time = mean_interval(time_sum, time_sq, trials);
    st.mean_time = time.point;
    st.mean_time_se = time.std_error;
    st.mean_stop_level = level_sum / n;
    st.martingale_residual = resid_sum / n;
    st.martingale_residual_se =
        trials > 1 ? std::sqrt(std::max(0.0, (resid_sq - resid_sum * resid_sum / n) / (n - 1.0)) / n) : kInf;
    return st;
}

} // namespace qoe
