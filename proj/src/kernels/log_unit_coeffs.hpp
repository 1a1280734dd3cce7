#pragma once

#include <cstdint>

// Shared constants for the log scheme: x = 2^k m, m in [sqrt(2)/2, sqrt(2)),
// f = m - 1, s = f/(2+f), log(m) = f - hfsq + s (hfsq + R(s^2)). Coefficients
// are the fdlibm minimax set.
namespace qoe::kernels::detail {

inline constexpr double kLg1 = 6.666666666666735130e-01;
inline constexpr double kLg2 = 3.999999999940941908e-01;
inline constexpr double kLg3 = 2.857142874366239149e-01;
inline constexpr double kLg4 = 2.222219843214978396e-01;
inline constexpr double kLg5 = 1.818357216161805012e-01;
inline constexpr double kLg6 = 1.531383769920937332e-01;
inline constexpr double kLg7 = 1.479819860511658591e-01;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kSqrt2 = 1.4142135623730951;

inline constexpr std::uint64_t kMantissaMask = 0x000FFFFFFFFFFFFFULL;
inline constexpr std::uint64_t kOneBits = 0x3FF0000000000000ULL;
// Bit pattern of 2^52; OR-ing a small integer into it and subtracting 2^52
// converts the integer to double exactly.
inline constexpr std::uint64_t kTwo52Bits = 0x4330000000000000ULL;
inline constexpr double kTwo52 = 4503599627370496.0;

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kMix1 = 0xBF58476D1CE4E5B9ULL;
inline constexpr std::uint64_t kMix2 = 0x94D049BB133111EBULL;

} // namespace qoe::kernels::detail
