// Compiled with -mavx2 -mfma; only reached through the runtime dispatch.

#include <immintrin.h>

#include "nvqo/kernels.hpp"

namespace nvqo::kernels::detail {
namespace {

// Two complex doubles per register: [re0, im0, re1, im1].
inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }
inline __m256d splat(cplx c) { return _mm256_setr_pd(c.real(), c.imag(), c.real(), c.imag()); }

inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d are = _mm256_movedup_pd(a);
    const __m256d aim = _mm256_permute_pd(a, 0xF);
    const __m256d bsw = _mm256_permute_pd(b, 0x5);
    return _mm256_fmaddsub_pd(are, b, _mm256_mul_pd(aim, bsw));
}

void pair_update(cplx* x, cplx* y, std::size_t n, const cplx* m) {
    const __m256d m00 = splat(m[0]), m01 = splat(m[1]);
    const __m256d m10 = splat(m[2]), m11 = splat(m[3]);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(x + i);
        const __m256d yv = load2(y + i);
        store2(x + i, _mm256_add_pd(cmul(m00, xv), cmul(m01, yv)));
        store2(y + i, _mm256_add_pd(cmul(m10, xv), cmul(m11, yv)));
    }
    if (i < n) {
        scalar_table.pair_update(x + i, y + i, n - i, m);
    }
}

void pair_update_interleaved(cplx* v, std::size_t npairs, const cplx* m) {
    const __m256d a = _mm256_setr_pd(m[0].real(), m[0].imag(), m[2].real(), m[2].imag());
    const __m256d b = _mm256_setr_pd(m[1].real(), m[1].imag(), m[3].real(), m[3].imag());
    for (std::size_t p = 0; p < npairs; ++p) {
        const __m256d xy = load2(v + 2 * p);
        const __m256d xx = _mm256_permute2f128_pd(xy, xy, 0x00);
        const __m256d yy = _mm256_permute2f128_pd(xy, xy, 0x11);
        store2(v + 2 * p, _mm256_add_pd(cmul(a, xx), cmul(b, yy)));
    }
}

void scale_by(cplx* x, const cplx* s, cplx factor, std::size_t n) {
    const __m256d f = splat(factor);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        store2(x + i, cmul(cmul(f, load2(s + i)), load2(x + i)));
    }
    if (i < n) {
        scalar_table.scale_by(x + i, s + i, factor, n - i);
    }
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
    const __m256d av = splat(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        store2(y + i, _mm256_add_pd(load2(y + i), cmul(av, load2(x + i))));
    }
    if (i < n) {
        scalar_table.axpy(a, x + i, y + i, n - i);
    }
}

cplx dot_conj(const cplx* x, const cplx* y, std::size_t n) {
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(x + i);
        const __m256d yv = load2(y + i);
        acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
        acc_im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), acc_im);
    }
    alignas(32) double re[4], im[4];
    _mm256_store_pd(re, acc_re);
    _mm256_store_pd(im, acc_im);
    // acc_im lanes hold [xr*yi, xi*yr, ...]; Im(x conj y) = xi*yr - xr*yi.
    cplx total(re[0] + re[1] + re[2] + re[3], (im[1] - im[0]) + (im[3] - im[2]));
    if (i < n) {
        total += scalar_table.dot_conj(x + i, y + i, n - i);
    }
    return total;
}

}  // namespace

const Table avx2_table{
    pair_update, pair_update_interleaved, scale_by, axpy, dot_conj,
};

}  // namespace nvqo::kernels::detail
