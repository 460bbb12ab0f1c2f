#pragma once

#include <cmath>

#include "nvqo/ansatz.hpp"
#include "nvqo/rng.hpp"

namespace fixture {

using namespace nvqo;

inline CMatrix random_matrix(std::size_t d, Rng& rng) {
    CMatrix m(d, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = cplx(rng.normal(), rng.normal());
    return m;
}

inline CMatrix random_hermitian(std::size_t d, Rng& rng) {
    const CMatrix m = random_matrix(d, rng);
    return 0.5 * (m + m.adjoint());
}

/// Full-rank random state A A^dag / Tr.
inline CMatrix random_density(std::size_t d, Rng& rng) {
    const CMatrix a = random_matrix(d, rng);
    CMatrix r = a * a.adjoint();
    return r / r.trace();
}

inline CVector random_vector(std::size_t d, Rng& rng) {
    CVector v(d);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(rng.normal(), rng.normal());
    return v.normalized();
}

inline RVector random_angles(int p, Rng& rng, double scale = 2.0 * kPi) {
    RVector t(p);
    for (int j = 0; j < p; ++j) t[j] = scale * rng.uniform();
    return t;
}

inline PauliString random_string(int n, Rng& rng, bool allow_identity = false) {
    for (;;) {
        std::vector<Pauli> axes(static_cast<std::size_t>(n));
        for (auto& a : axes) a = static_cast<Pauli>(rng.engine()() % 4);
        PauliString s(std::move(axes));
        if (allow_identity || !s.is_identity()) return s;
    }
}

inline PauliSum random_sum(int n, int terms, Rng& rng) {
    std::vector<PauliTerm> t;
    for (int k = 0; k < terms; ++k) t.push_back({2.0 * rng.uniform() - 1.0, random_string(n, rng, true)});
    return PauliSum(n, std::move(t));
}

/// Noisy QAOA ring with z-depolarizing noise of strength eta.
inline ParametricCircuit noisy_ring(int n, int layers, double eta) {
    return build_qaoa(QaoaSpec::ring(n, layers), ZDepolarizing{eta});
}

}  // namespace fixture
