#pragma once

// Batch generation of standard exponential variates from a counter-based
// stream. Element i of a batch starting at `counter` is
//
//     -log(u),   u = 1 - frac52(splitmix64(key, counter + i)) in (0, 1]
//
// where frac52 keeps the top 52 hash bits as a fraction in [0, 1). The log is
// evaluated with a fixed polynomial scheme built only from +, -, *, / so the
// scalar reference and every vector variant produce bit-identical output.
// Which variant runs never changes simulation results.

#include <cstdint>
#include <span>
#include <string_view>

namespace qoe::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// SplitMix64 output number `counter` of the stream keyed by `key`.
inline std::uint64_t counter_hash(std::uint64_t key, std::uint64_t counter) {
    std::uint64_t z = key + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform in (0, 1] on a 2^-52 lattice.
double open_unit_from_bits(std::uint64_t bits);

/// Natural log for u in (0, 1] using the shared polynomial scheme.
double log_unit(double u);

void exp_variates_scalar(std::uint64_t key, std::uint64_t counter, std::span<double> out);

#if defined(QOE_BUILD_AVX2)
void exp_variates_avx2(std::uint64_t key, std::uint64_t counter, std::span<double> out);
#endif

/// True when an AVX2 variant was compiled in and the CPU reports AVX2.
bool avx2_available();

/// Variant used by exp_variates(). Defaults to the best available one;
/// QOE_FORCE_SCALAR=1 in the environment pins the scalar reference.
Isa active_isa();

/// Override the active variant (tests). Requesting an unavailable ISA falls
/// back to Scalar. Returns the variant actually selected.
Isa select_isa(Isa isa);

void exp_variates(std::uint64_t key, std::uint64_t counter, std::span<double> out);

} // namespace qoe::kernels
