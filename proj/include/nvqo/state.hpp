#pragma once

#include <cstdint>
#include <vector>

#include "nvqo/pauli.hpp"
#include "nvqo/types.hpp"

namespace nvqo {

class PureState {
  public:
    /// Throws DomainError unless the 2-norm is 1 within 1e-12.
    explicit PureState(CVector amplitudes);

    static PureState basis(int nqubits, std::size_t index);

    int nqubits() const { return nqubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
    const CVector& amplitudes() const { return amplitudes_; }
    CMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

  private:
    CVector amplitudes_;
    int nqubits_;
};

/// |+>^N, the ground state of the transverse-field mixer.
PureState plus_state(int nqubits);

/// Hermitian, positive, unit-trace 2^N x 2^N matrix.
class DensityMatrix {
  public:
    /// Checks Hermiticity, unit trace and eigenvalues >= -tol (tol = 1e-10).
    explicit DensityMatrix(CMatrix data);

    /// Skips the eigenvalue check; for states produced by a trusted pipeline
    /// that already repaired Hermiticity and trace.
    static DensityMatrix trusted(CMatrix data);

    static DensityMatrix from_pure(const PureState& psi);
    static DensityMatrix maximally_mixed(int nqubits);

    int nqubits() const { return nqubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
    const CMatrix& matrix() const { return data_; }

    double trace() const { return data_.trace().real(); }
    double purity() const;

  private:
    DensityMatrix(CMatrix data, int nqubits) : data_(std::move(data)), nqubits_(nqubits) {}

    CMatrix data_;
    int nqubits_;
};

/// log2 of a power-of-two dimension; throws DimensionError otherwise.
int qubits_for_dim(std::size_t dim);

/// Replace X by (X + X^dag)/2 in place.
void hermitize(CMatrix& x);

/// Tr[A B] for Hermitian B (any A): sum_ab A_ab conj(B_ab).
cplx trace_product(const CMatrix& a, const CMatrix& hermitian_b);

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
double trace_norm_hermitian(const CMatrix& x);

/// 1/2 ||a - b||_1 for Hermitian a, b.
double trace_distance(const CMatrix& a, const CMatrix& b);

/// Tr[rho H]. The imaginary part is asserted below 1e-10 and discarded.
double expectation(const DensityMatrix& rho, const PauliSum& h);
double expectation(const CMatrix& rho, const PauliSum& h);
/// Same quantity summed term by term, sum_t c_t Tr[rho S_t].
double expectation_termwise(const CMatrix& rho, const PauliSum& h);

/// Tr[rho H^2] - Tr[rho H]^2, clamped at 0 when above -1e-9.
double variance(const DensityMatrix& rho, const PauliSum& h);

/// <psi|rho|psi>
double fidelity_pure(const PureState& psi, const DensityMatrix& rho);

/// Eigenbasis of an observable; diagonal observables keep the computational basis.
class MeasurementBasis {
  public:
    explicit MeasurementBasis(const PauliSum& h);
    explicit MeasurementBasis(const CMatrix& hermitian);

    bool diagonal() const { return diagonal_; }
    std::size_t size() const { return static_cast<std::size_t>(energies_.size()); }
    const RVector& energies() const { return energies_; }
    const CMatrix& vectors() const { return vectors_; }

    /// <y|X|y> for every outcome y (real part). Linear in X, so it also maps
    /// a state derivative to d p(y) / d theta.
    RVector diagonal_of(const CMatrix& x) const;

  private:
    RVector energies_;
    CMatrix vectors_;
    bool diagonal_ = false;
};

/// Born probabilities from raw <y|rho|y> values: entries in (-1e-9, 0) are
/// clamped to 0, anything more negative is a NumericalError, and the vector
/// must sum to 1 within 1e-8.
std::vector<double> born_probabilities(const RVector& raw);

struct Outcome {
    std::size_t label;
    double energy;
};

std::vector<Outcome> sample_outcomes(const DensityMatrix& rho, const MeasurementBasis& basis, int shots,
                                     std::uint64_t seed);
std::vector<Outcome> sample_outcomes(const DensityMatrix& rho, const PauliSum& h, int shots, std::uint64_t seed);

}  // namespace nvqo
