#include "nvqo/state.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "nvqo/error.hpp"
#include "nvqo/kernels.hpp"
#include "nvqo/rng.hpp"

namespace nvqo {
namespace {

constexpr double kStateTol = 1e-10;

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dimension " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

}  // namespace

int qubits_for_dim(std::size_t dim) {
    if (dim < 2 || !std::has_single_bit(dim)) throw DimensionError("dimension is not a power of two");
    return std::countr_zero(dim);
}

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    nqubits_ = qubits_for_dim(static_cast<std::size_t>(amplitudes_.size()));
    check_qubit_cap(nqubits_);
    if (std::abs(amplitudes_.norm() - 1.0) > 1e-12) throw DomainError("state vector is not normalised");
}

PureState PureState::basis(int nqubits, std::size_t index) {
    check_qubit_cap(nqubits);
    const std::size_t d = dim_of(nqubits);
    if (index >= d) throw DimensionError("basis index out of range");
    CVector v = CVector::Zero(static_cast<Eigen::Index>(d));
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return PureState(std::move(v));
}

PureState plus_state(int nqubits) {
    check_qubit_cap(nqubits);
    const std::size_t d = dim_of(nqubits);
    return PureState(CVector::Constant(static_cast<Eigen::Index>(d), cplx(1.0 / std::sqrt(static_cast<double>(d)), 0)));
}

DensityMatrix::DensityMatrix(CMatrix data) : data_(std::move(data)) {
    if (data_.rows() != data_.cols()) throw DimensionError("density matrix must be square");
    nqubits_ = qubits_for_dim(static_cast<std::size_t>(data_.rows()));
    check_qubit_cap(nqubits_);
    if ((data_ - data_.adjoint()).cwiseAbs().maxCoeff() > kStateTol) throw DomainError("density matrix is not Hermitian");
    if (std::abs(data_.trace() - cplx(1.0)) > kStateTol) throw DomainError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(data_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()[0] < -kStateTol) throw DomainError("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::trusted(CMatrix data) {
    if (data.rows() != data.cols()) throw DimensionError("density matrix must be square");
    const int n = qubits_for_dim(static_cast<std::size_t>(data.rows()));
    return DensityMatrix(std::move(data), n);
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) { return DensityMatrix(psi.projector(), psi.nqubits()); }

DensityMatrix DensityMatrix::maximally_mixed(int nqubits) {
    check_qubit_cap(nqubits);
    const auto d = static_cast<Eigen::Index>(dim_of(nqubits));
    return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d), nqubits);
}

double DensityMatrix::purity() const { return trace_product(data_, data_).real(); }

void hermitize(CMatrix& x) {
    const auto n = x.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        x(j, j) = cplx(x(j, j).real(), 0.0);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const cplx avg = 0.5 * (x(i, j) + std::conj(x(j, i)));
            x(i, j) = avg;
            x(j, i) = std::conj(avg);
        }
    }
}

cplx trace_product(const CMatrix& a, const CMatrix& hermitian_b) {
    if (a.rows() != hermitian_b.rows() || a.cols() != hermitian_b.cols()) {
        throw DimensionError("trace product: size mismatch");
    }
    return kernels::active().dot_conj(a.data(), hermitian_b.data(), static_cast<std::size_t>(a.size()));
}

double trace_norm_hermitian(const CMatrix& x) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(x, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("trace distance: size mismatch");
    return 0.5 * trace_norm_hermitian(a - b);
}

double expectation(const CMatrix& rho, const PauliSum& h) {
    require_same_dim(static_cast<std::size_t>(rho.rows()), dim_of(h.nqubits()), "expectation");
    cplx value;
    if (h.is_diagonal()) {
        const RVector diag = h.realize_diagonal();
        double acc = 0.0;
        for (Eigen::Index a = 0; a < diag.size(); ++a) acc += diag[a] * rho(a, a).real();
        return acc;
    }
    value = trace_product(rho, h.realize());
    if (std::abs(value.imag()) > 1e-10) throw NumericalError("expectation value has an imaginary part");
    return value.real();
}

double expectation(const DensityMatrix& rho, const PauliSum& h) { return expectation(rho.matrix(), h); }

double expectation_termwise(const CMatrix& rho, const PauliSum& h) {
    const auto d = static_cast<std::size_t>(rho.rows());
    require_same_dim(d, dim_of(h.nqubits()), "expectation");
    cplx total = 0.0;
    for (const auto& t : h.terms()) {
        // Tr[rho S] = sum_a rho_{a, a^flip} phase(a)
        const std::size_t flip = t.string.flip_mask();
        cplx acc = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            acc += rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a ^ flip)) * t.string.phase(a);
        }
        total += t.coefficient * acc;
    }
    if (std::abs(total.imag()) > 1e-10) throw NumericalError("expectation value has an imaginary part");
    return total.real();
}

double variance(const DensityMatrix& rho, const PauliSum& h) {
    require_same_dim(rho.dim(), dim_of(h.nqubits()), "variance");
    double mean = 0.0, second = 0.0;
    if (h.is_diagonal()) {
        const RVector diag = h.realize_diagonal();
        for (Eigen::Index a = 0; a < diag.size(); ++a) {
            const double p = rho.matrix()(a, a).real();
            mean += diag[a] * p;
            second += diag[a] * diag[a] * p;
        }
    } else {
        const CMatrix hm = h.realize();
        mean = trace_product(rho.matrix(), hm).real();
        second = trace_product(rho.matrix(), hm * hm).real();
    }
    const double var = second - mean * mean;
    if (var < -1e-9) throw NumericalError("negative variance");
    return var < 0.0 ? 0.0 : var;
}

double fidelity_pure(const PureState& psi, const DensityMatrix& rho) {
    require_same_dim(psi.dim(), rho.dim(), "fidelity");
    const cplx f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
    return f.real();
}

MeasurementBasis::MeasurementBasis(const PauliSum& h) {
    if (h.is_diagonal()) {
        diagonal_ = true;
        energies_ = h.realize_diagonal();
        return;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(h.realize());
    energies_ = eig.eigenvalues();
    vectors_ = eig.eigenvectors();
}

MeasurementBasis::MeasurementBasis(const CMatrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian);
    energies_ = eig.eigenvalues();
    vectors_ = eig.eigenvectors();
}

RVector MeasurementBasis::diagonal_of(const CMatrix& x) const {
    require_same_dim(static_cast<std::size_t>(x.rows()), size(), "measurement basis");
    if (diagonal_) return x.diagonal().real();
    // <y|X|y> for each column y of V
    const CMatrix xv = x * vectors_;
    return (vectors_.conjugate().cwiseProduct(xv)).colwise().sum().real().transpose();
}

std::vector<double> born_probabilities(const RVector& raw) {
    std::vector<double> p(static_cast<std::size_t>(raw.size()));
    double total = 0.0;
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        double v = raw[i];
        if (v < 0.0) {
            if (v < -1e-9) throw NumericalError("Born probability below -1e-9");
            v = 0.0;
        }
        p[static_cast<std::size_t>(i)] = v;
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-8) throw NumericalError("state is not normalised (Born probabilities sum to " +
                                                           std::to_string(total) + ")");
    return p;
}

std::vector<Outcome> sample_outcomes(const DensityMatrix& rho, const MeasurementBasis& basis, int shots,
                                     std::uint64_t seed) {
    if (shots < 1) throw DomainError("shots must be >= 1");
    const auto p = born_probabilities(basis.diagonal_of(rho.matrix()));
    DiscreteSampler sampler(p);
    Rng rng(seed);
    std::vector<Outcome> out;
    out.reserve(static_cast<std::size_t>(shots));
    for (int s = 0; s < shots; ++s) {
        const std::size_t y = sampler(rng);
        out.push_back({y, basis.energies()[static_cast<Eigen::Index>(y)]});
    }
    return out;
}

std::vector<Outcome> sample_outcomes(const DensityMatrix& rho, const PauliSum& h, int shots, std::uint64_t seed) {
    return sample_outcomes(rho, MeasurementBasis(h), shots, seed);
}

}  // namespace nvqo
