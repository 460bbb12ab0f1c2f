#pragma once

#include <vector>

#include "nvqo/pauli.hpp"
#include "nvqo/types.hpp"

namespace nvqo {

/// U(theta) = exp(-i theta G) for a fixed Pauli-sum generator G, applied
/// through the cheapest structure the generator admits:
///   Diagonal      I/Z-only terms: elementwise phases.
///   LocalProduct  weight-1 terms on distinct qubits: product of 2x2 rotations.
///   SingleString  one Pauli string S: cos I - i sin S.
///   Dense         eigendecomposition of the realised generator.
class GeneratorExp {
  public:
    enum class Form { Diagonal, LocalProduct, SingleString, Dense };

    explicit GeneratorExp(PauliSum generator);

    Form form() const { return form_; }
    const PauliSum& generator() const { return generator_; }
    int nqubits() const { return generator_.nqubits(); }

    /// x <- U x U^dag
    void conjugate(CMatrix& x, double theta) const;
    /// v <- U v
    void apply(CVector& v, double theta) const;
    /// Dense exp(-i theta G) from the eigendecomposition, whatever the form.
    CMatrix matrix(double theta) const;

    /// Ascending eigenvalues of G.
    const RVector& eigenvalues() const;

  private:
    struct Rotation {
        std::size_t mask;
        double coefficient;
        Pauli axis;
    };

    void ensure_eigen() const;

    PauliSum generator_;
    Form form_;
    RVector diag_;
    std::vector<Rotation> rotations_;
    mutable RVector evals_;
    mutable CMatrix evecs_;
    mutable bool have_eigen_ = false;
};

/// 2x2 matrix of exp(-i angle sigma) in row-major order.
void rotation_2x2(Pauli axis, double angle, cplx out[4]);

}  // namespace nvqo
