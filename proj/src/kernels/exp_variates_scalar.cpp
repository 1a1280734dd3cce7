#include <bit>

#include "log_unit_coeffs.hpp"
#include "qoe/kernels/exp_variates.hpp"

namespace qoe::kernels {

using namespace detail;

double open_unit_from_bits(std::uint64_t bits) {
    const double frac = std::bit_cast<double>((bits >> 12) | kOneBits) - 1.0;
    return 1.0 - frac;
}

double log_unit(double u) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(u);
    const std::uint64_t biased_exp = bits >> 52;
    double m = std::bit_cast<double>((bits & kMantissaMask) | kOneBits);
    double k = (std::bit_cast<double>(biased_exp | kTwo52Bits) - kTwo52) - 1023.0;
    if (m > kSqrt2) {
        m = m * 0.5;
        k = k + 1.0;
    }
    const double f = m - 1.0;
    const double s = f / (2.0 + f);
    const double z = s * s;
    const double w = z * z;
    const double t1 = w * (kLg2 + w * (kLg4 + w * kLg6));
    const double t2 = z * (kLg1 + w * (kLg3 + w * (kLg5 + w * kLg7)));
    const double r = t2 + t1;
    const double hfsq = (0.5 * f) * f;
    return k * kLn2Hi - ((hfsq - (s * (hfsq + r) + k * kLn2Lo)) - f);
}

void exp_variates_scalar(std::uint64_t key, std::uint64_t counter, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double u = open_unit_from_bits(counter_hash(key, counter + i));
        out[i] = -log_unit(u);
    }
}

} // namespace qoe::kernels
