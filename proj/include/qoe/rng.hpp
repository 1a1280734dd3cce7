#pragma once

// Per-trial random streams. Trial i of a run seeded with master_seed owns two
// counter-based SplitMix64 streams, keyed by
//
//     key(stream) = splitmix64(splitmix64(master_seed ^ stream_tag) + trial_index)
//
// so any trial can be reproduced in isolation and results never depend on
// which thread ran it or in what order.

#include <array>
#include <cstdint>

#include "qoe/kernels/exp_variates.hpp"

namespace qoe {

enum class StreamTag : std::uint64_t {
    Arrivals = 0xA5A5'0001'0000'0000ULL,
    Thinning = 0xA5A5'0002'0000'0000ULL,
};

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trial_index, StreamTag tag);

/// Buffered standard exponential variates (mean 1).
class ExpStream {
public:
    explicit ExpStream(std::uint64_t key) : key_(key) {}

    double next() {
        if (pos_ == buffer_.size()) refill();
        return buffer_[pos_++];
    }

    /// Number of variates handed out so far.
    std::uint64_t consumed() const { return counter_ - (buffer_.size() - pos_); }

private:
    void refill() {
        kernels::exp_variates(key_, counter_, buffer_);
        counter_ += buffer_.size();
        pos_ = 0;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::array<double, 64> buffer_{};
    std::size_t pos_ = buffer_.size();
};

/// Uniform variates in [0, 1).
class UniformStream {
public:
    explicit UniformStream(std::uint64_t key) : key_(key) {}

    double next() {
        return static_cast<double>(kernels::counter_hash(key_, counter_++) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct TrialStreams {
    ExpStream arrivals;
    UniformStream thinning;

    TrialStreams(std::uint64_t master_seed, std::uint64_t trial_index)
        : arrivals(stream_key(master_seed, trial_index, StreamTag::Arrivals)),
          thinning(stream_key(master_seed, trial_index, StreamTag::Thinning)) {}
};

} // namespace qoe
