// AVX2 variant of the exponential variate kernel. Compiled with -mavx2 only;
// every lane performs the same IEEE operations, in the same order, as the
// scalar reference.

#include <immintrin.h>

#include "log_unit_coeffs.hpp"
#include "qoe/kernels/exp_variates.hpp"

namespace qoe::kernels {

using namespace detail;

namespace {

// Low 64 bits of a 64x64 product per lane.
inline __m256i mullo_epi64(__m256i a, __m256i b) {
    const __m256i a_hi = _mm256_srli_epi64(a, 32);
    const __m256i b_hi = _mm256_srli_epi64(b, 32);
    const __m256i lo = _mm256_mul_epu32(a, b);
    const __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(a_hi, b), _mm256_mul_epu32(a, b_hi));
    return _mm256_add_epi64(lo, _mm256_slli_epi64(cross, 32));
}

inline __m256i splitmix_finalize(__m256i z) {
    const __m256i mix1 = _mm256_set1_epi64x(static_cast<long long>(kMix1));
    const __m256i mix2 = _mm256_set1_epi64x(static_cast<long long>(kMix2));
    z = mullo_epi64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 30)), mix1);
    z = mullo_epi64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 27)), mix2);
    return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

inline __m256d neg_log_unit(__m256d u) {
    const __m256i bits = _mm256_castpd_si256(u);
    const __m256i biased_exp = _mm256_srli_epi64(bits, 52);
    const __m256i mant_bits =
        _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(static_cast<long long>(kMantissaMask))),
                        _mm256_set1_epi64x(static_cast<long long>(kOneBits)));
    __m256d m = _mm256_castsi256_pd(mant_bits);
    const __m256d exp_as_double = _mm256_castsi256_pd(
        _mm256_or_si256(biased_exp, _mm256_set1_epi64x(static_cast<long long>(kTwo52Bits))));
    __m256d k = _mm256_sub_pd(_mm256_sub_pd(exp_as_double, _mm256_set1_pd(kTwo52)),
                              _mm256_set1_pd(1023.0));

    const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    k = _mm256_blendv_pd(k, _mm256_add_pd(k, _mm256_set1_pd(1.0)), big);

    const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
    const __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
    const __m256d z = _mm256_mul_pd(s, s);
    const __m256d w = _mm256_mul_pd(z, z);

    auto c = [](double v) { return _mm256_set1_pd(v); };
    const __m256d t1 = _mm256_mul_pd(
        w, _mm256_add_pd(c(kLg2), _mm256_mul_pd(w, _mm256_add_pd(c(kLg4), _mm256_mul_pd(w, c(kLg6))))));
    const __m256d t2 = _mm256_mul_pd(
        z, _mm256_add_pd(c(kLg1),
                         _mm256_mul_pd(w, _mm256_add_pd(c(kLg3),
                                                        _mm256_mul_pd(w, _mm256_add_pd(c(kLg5),
                                                                                       _mm256_mul_pd(w, c(kLg7))))))));
    const __m256d r = _mm256_add_pd(t2, t1);
    const __m256d hfsq = _mm256_mul_pd(_mm256_mul_pd(c(0.5), f), f);
    const __m256d inner = _mm256_sub_pd(
        _mm256_sub_pd(hfsq, _mm256_add_pd(_mm256_mul_pd(s, _mm256_add_pd(hfsq, r)), _mm256_mul_pd(k, c(kLn2Lo)))),
        f);
    const __m256d log_u = _mm256_sub_pd(_mm256_mul_pd(k, c(kLn2Hi)), inner);
    return _mm256_xor_pd(log_u, c(-0.0));
}

} // namespace

void exp_variates_avx2(std::uint64_t key, std::uint64_t counter, std::span<double> out) {
    const std::size_t n = out.size();
    std::size_t i = 0;
    if (n >= 4) {
        const std::uint64_t base = key + (counter + 1) * kGolden;
        __m256i z = _mm256_add_epi64(
            _mm256_set1_epi64x(static_cast<long long>(base)),
            _mm256_set_epi64x(static_cast<long long>(3 * kGolden), static_cast<long long>(2 * kGolden),
                              static_cast<long long>(kGolden), 0));
        const __m256i stride = _mm256_set1_epi64x(static_cast<long long>(4 * kGolden));
        const __m256i one_bits = _mm256_set1_epi64x(static_cast<long long>(kOneBits));
        const __m256d one = _mm256_set1_pd(1.0);
        auto uniform = [&](__m256i state) {
            const __m256i h = splitmix_finalize(state);
            const __m256d frac =
                _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(_mm256_srli_epi64(h, 12), one_bits)), one);
            return _mm256_sub_pd(one, frac);
        };
        // Two independent groups per iteration keep both chains in flight.
        for (; i + 8 <= n; i += 8) {
            const __m256i z2 = _mm256_add_epi64(z, stride);
            const __m256d a = neg_log_unit(uniform(z));
            const __m256d b = neg_log_unit(uniform(z2));
            _mm256_storeu_pd(out.data() + i, a);
            _mm256_storeu_pd(out.data() + i + 4, b);
            z = _mm256_add_epi64(z2, stride);
        }
        for (; i + 4 <= n; i += 4) {
            _mm256_storeu_pd(out.data() + i, neg_log_unit(uniform(z)));
            z = _mm256_add_epi64(z, stride);
        }
    }
    if (i < n) exp_variates_scalar(key, counter + i, out.subspan(i));
}

} // namespace qoe::kernels
