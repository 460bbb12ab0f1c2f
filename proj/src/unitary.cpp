#include "nvqo/unitary.hpp"

#include <cmath>
#include <set>

#include "nvqo/error.hpp"
#include "nvqo/kernels.hpp"

namespace nvqo {

void rotation_2x2(Pauli axis, double angle, cplx out[4]) {
    const double c = std::cos(angle), s = std::sin(angle);
    switch (axis) {
        case Pauli::I:
            out[0] = {c, -s}; out[1] = 0; out[2] = 0; out[3] = {c, -s};
            break;
        case Pauli::X:
            out[0] = c; out[1] = {0, -s}; out[2] = {0, -s}; out[3] = c;
            break;
        case Pauli::Y:
            out[0] = c; out[1] = -s; out[2] = s; out[3] = c;
            break;
        case Pauli::Z:
            out[0] = {c, -s}; out[1] = 0; out[2] = 0; out[3] = {c, s};
            break;
    }
}

GeneratorExp::GeneratorExp(PauliSum generator) : generator_(std::move(generator)), form_(Form::Dense) {
    check_qubit_cap(generator_.nqubits());
    const int n = generator_.nqubits();
    if (generator_.is_diagonal()) {
        form_ = Form::Diagonal;
        diag_ = generator_.realize_diagonal();
        return;
    }
    bool local = true;
    std::set<int> used;
    for (const auto& t : generator_.terms()) {
        if (t.string.weight() != 1) {
            local = false;
            break;
        }
        for (int q = 0; q < n; ++q) {
            if (t.string[q] == Pauli::I) continue;
            if (!used.insert(q).second) local = false;
            rotations_.push_back({qubit_mask(n, q), t.coefficient, t.string[q]});
        }
    }
    if (local) {
        form_ = Form::LocalProduct;
        return;
    }
    rotations_.clear();
    form_ = generator_.terms().size() == 1 ? Form::SingleString : Form::Dense;
    if (form_ == Form::Dense) ensure_eigen();
}

void GeneratorExp::ensure_eigen() const {
    if (have_eigen_) return;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(generator_.realize());
    evals_ = eig.eigenvalues();
    evecs_ = eig.eigenvectors();
    have_eigen_ = true;
}

const RVector& GeneratorExp::eigenvalues() const {
    ensure_eigen();
    return evals_;
}

CMatrix GeneratorExp::matrix(double theta) const {
    ensure_eigen();
    CVector phases(evals_.size());
    for (Eigen::Index i = 0; i < evals_.size(); ++i) phases[i] = std::polar(1.0, -theta * evals_[i]);
    return evecs_ * phases.asDiagonal() * evecs_.adjoint();
}

void GeneratorExp::conjugate(CMatrix& x, double theta) const {
    const auto d = static_cast<std::size_t>(x.rows());
    if (d != dim_of(nqubits()) || x.cols() != x.rows()) throw DimensionError("unitary / operator size mismatch");
    const auto& k = kernels::active();
    switch (form_) {
        case Form::Diagonal: {
            std::vector<cplx> ph(d);
            for (std::size_t a = 0; a < d; ++a) ph[a] = std::polar(1.0, -theta * diag_[static_cast<Eigen::Index>(a)]);
            for (std::size_t b = 0; b < d; ++b) k.scale_by(x.data() + b * d, ph.data(), std::conj(ph[b]), d);
            return;
        }
        case Form::LocalProduct: {
            const std::size_t len = d * d;
            for (const auto& r : rotations_) {
                cplx m[4], mc[4];
                rotation_2x2(r.axis, theta * r.coefficient, m);
                for (int i = 0; i < 4; ++i) mc[i] = std::conj(m[i]);
                kernels::apply_1q_flat(x.data(), len, r.mask, m);       // rows
                kernels::apply_1q_flat(x.data(), len, r.mask * d, mc);  // columns
            }
            return;
        }
        case Form::SingleString: {
            const auto& t = generator_.terms().front();
            const double c = std::cos(theta * t.coefficient), s = std::sin(theta * t.coefficient);
            CMatrix out = (c * c) * x;
            add_conjugation(t.string, s * s, x, out);
            add_left_product(t.string, cplx(0, -c * s), x, out);
            add_right_product(t.string, cplx(0, c * s), x, out);
            x = std::move(out);
            return;
        }
        case Form::Dense: {
            const CMatrix u = matrix(theta);
            x = u * x * u.adjoint();
            return;
        }
    }
}

void GeneratorExp::apply(CVector& v, double theta) const {
    const auto d = static_cast<std::size_t>(v.size());
    if (d != dim_of(nqubits())) throw DimensionError("unitary / vector size mismatch");
    switch (form_) {
        case Form::Diagonal:
            for (std::size_t a = 0; a < d; ++a) {
                v[static_cast<Eigen::Index>(a)] *= std::polar(1.0, -theta * diag_[static_cast<Eigen::Index>(a)]);
            }
            return;
        case Form::LocalProduct:
            for (const auto& r : rotations_) {
                cplx m[4];
                rotation_2x2(r.axis, theta * r.coefficient, m);
                kernels::apply_1q_flat(v.data(), d, r.mask, m);
            }
            return;
        case Form::SingleString: {
            const auto& t = generator_.terms().front();
            const double c = std::cos(theta * t.coefficient), s = std::sin(theta * t.coefficient);
            v = c * v + cplx(0, -s) * nvqo::apply(t.string, v);
            return;
        }
        case Form::Dense:
            v = matrix(theta) * v;
            return;
    }
}

}  // namespace nvqo
