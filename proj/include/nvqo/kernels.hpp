#pragma once

// Data-parallel inner loops over contiguous complex spans.
//
// Every entry has a scalar reference implementation; an AVX2/FMA table is
// compiled in when the toolchain targets x86_64 and is picked at runtime when
// the CPU reports avx2+fma. NVQO_KERNELS=scalar|avx2 in the environment
// overrides the automatic choice.

#include <cstddef>
#include <string_view>

#include "nvqo/types.hpp"

namespace nvqo::kernels {

enum class Backend { Scalar, Avx2 };

struct Table {
    // x' = m00 x + m01 y,  y' = m10 x + m11 y   (m row-major, 4 entries)
    void (*pair_update)(cplx* x, cplx* y, std::size_t n, const cplx* m);
    // Same update on adjacent pairs (v[2i], v[2i+1]).
    void (*pair_update_interleaved)(cplx* v, std::size_t npairs, const cplx* m);
    // x_i *= s_i * factor
    void (*scale_by)(cplx* x, const cplx* s, cplx factor, std::size_t n);
    // y += a x
    void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
    // sum_i x_i conj(y_i)
    cplx (*dot_conj)(const cplx* x, const cplx* y, std::size_t n);
};

const Table& table(Backend backend);
bool available(Backend backend);
std::string_view name(Backend backend);

/// Table used by the simulator; resolved once on first use.
const Table& active();
Backend active_backend();

/// Force a backend (tests, benchmarking). Throws nvqo::Error when the backend
/// is not available on this build/CPU.
void select(Backend backend);

/// Apply a 2x2 operator on the bit `mask` of a flat complex array of length
/// `len` (a multiple of 2*mask). A column-major d x d matrix is a flat array
/// whose low log2(d) bits index rows and high bits index columns.
void apply_1q_flat(cplx* data, std::size_t len, std::size_t mask, const cplx* m);

namespace detail {
extern const Table scalar_table;
#if defined(NVQO_HAVE_AVX2)
extern const Table avx2_table;
#endif
}  // namespace detail

}  // namespace nvqo::kernels
