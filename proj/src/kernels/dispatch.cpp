#include <atomic>
#include <cstdlib>
#include <cstring>

#include "qoe/kernels/exp_variates.hpp"

namespace qoe::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(QOE_BUILD_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa default_isa() {
    const char* force = std::getenv("QOE_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "0") != 0 && force[0] != '\0') return Isa::Scalar;
    return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{default_isa()};
    return isa;
}

} // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool avx2_available() {
    static const bool available = cpu_has_avx2();
    return available;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa select_isa(Isa isa) {
    if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
    current().store(isa, std::memory_order_relaxed);
    return isa;
}

void exp_variates(std::uint64_t key, std::uint64_t counter, std::span<double> out) {
#if defined(QOE_BUILD_AVX2)
    if (active_isa() == Isa::Avx2) {
        exp_variates_avx2(key, counter, out);
        return;
    }
#endif
    exp_variates_scalar(key, counter, out);
}

} // namespace qoe::kernels
