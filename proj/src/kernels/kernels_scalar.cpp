#include "nvqo/kernels.hpp"

namespace nvqo::kernels::detail {
namespace {

// Explicit real arithmetic; std::complex operator* goes through the
// Annex G NaN-recovery path which we do not need here.
inline void cmul_add(double ar, double ai, double br, double bi, double& re, double& im) {
    re += ar * br - ai * bi;
    im += ar * bi + ai * br;
}

void pair_update(cplx* x, cplx* y, std::size_t n, const cplx* m) {
    const double m00r = m[0].real(), m00i = m[0].imag();
    const double m01r = m[1].real(), m01i = m[1].imag();
    const double m10r = m[2].real(), m10i = m[2].imag();
    const double m11r = m[3].real(), m11i = m[3].imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        double ar = 0, ai = 0, br = 0, bi = 0;
        cmul_add(m00r, m00i, xr, xi, ar, ai);
        cmul_add(m01r, m01i, yr, yi, ar, ai);
        cmul_add(m10r, m10i, xr, xi, br, bi);
        cmul_add(m11r, m11i, yr, yi, br, bi);
        x[i] = cplx(ar, ai);
        y[i] = cplx(br, bi);
    }
}

void pair_update_interleaved(cplx* v, std::size_t npairs, const cplx* m) {
    for (std::size_t p = 0; p < npairs; ++p) {
        pair_update(v + 2 * p, v + 2 * p + 1, 1, m);
    }
}

void scale_by(cplx* x, const cplx* s, cplx factor, std::size_t n) {
    const double fr = factor.real(), fi = factor.imag();
    for (std::size_t i = 0; i < n; ++i) {
        double tr = 0, ti = 0;
        cmul_add(fr, fi, s[i].real(), s[i].imag(), tr, ti);
        double rr = 0, ri = 0;
        cmul_add(tr, ti, x[i].real(), x[i].imag(), rr, ri);
        x[i] = cplx(rr, ri);
    }
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
    const double ar = a.real(), ai = a.imag();
    for (std::size_t i = 0; i < n; ++i) {
        double re = y[i].real(), im = y[i].imag();
        cmul_add(ar, ai, x[i].real(), x[i].imag(), re, im);
        y[i] = cplx(re, im);
    }
}

cplx dot_conj(const cplx* x, const cplx* y, std::size_t n) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        re += xr * yr + xi * yi;
        im += xi * yr - xr * yi;
    }
    return {re, im};
}

}  // namespace

const Table scalar_table{
    pair_update, pair_update_interleaved, scale_by, axpy, dot_conj,
};

}  // namespace nvqo::kernels::detail
