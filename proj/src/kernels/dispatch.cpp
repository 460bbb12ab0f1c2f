#include <atomic>
#include <cstdlib>
#include <string>

#include "nvqo/error.hpp"
#include "nvqo/kernels.hpp"

namespace nvqo::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(NVQO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend initial_backend() {
    if (const char* env = std::getenv("NVQO_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return Backend::Scalar;
        if (want == "avx2" && available(Backend::Avx2)) return Backend::Avx2;
    }
    return available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
    static std::atomic<Backend> backend{initial_backend()};
    return backend;
}

}  // namespace

bool available(Backend backend) {
    switch (backend) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2: {
            static const bool ok = cpu_has_avx2();
            return ok;
        }
    }
    return false;
}

std::string_view name(Backend backend) {
    return backend == Backend::Avx2 ? "avx2" : "scalar";
}

const Table& table(Backend backend) {
    if (!available(backend)) {
        throw Error("kernel backend '" + std::string(name(backend)) + "' is not available");
    }
#if defined(NVQO_HAVE_AVX2)
    if (backend == Backend::Avx2) return detail::avx2_table;
#endif
    return detail::scalar_table;
}

const Table& active() { return table(current().load(std::memory_order_relaxed)); }

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void select(Backend backend) {
    table(backend);
    current().store(backend, std::memory_order_relaxed);
}

void apply_1q_flat(cplx* data, std::size_t len, std::size_t mask, const cplx* m) {
    const Table& k = active();
    if (mask == 1) {
        k.pair_update_interleaved(data, len / 2, m);
        return;
    }
    for (std::size_t base = 0; base < len; base += 2 * mask) {
        k.pair_update(data + base, data + base + mask, mask, m);
    }
}

}  // namespace nvqo::kernels
