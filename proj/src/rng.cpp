#include "qoe/rng.hpp"

namespace qoe {

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trial_index, StreamTag tag) {
    const std::uint64_t run_key = kernels::counter_hash(master_seed ^ static_cast<std::uint64_t>(tag), 0);
    return kernels::counter_hash(run_key, trial_index);
}

} // namespace qoe
