#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "nvqo/types.hpp"

namespace nvqo {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Pauli p);

/// Tensor product of single-qubit Paulis, qubit 0 first.
///
/// Acting on a basis state it permutes and phases:
///   S |c> = phase(c) |c ^ flip_mask()>
/// which is what every realisation below is built on.
class PauliString {
  public:
    explicit PauliString(std::vector<Pauli> axes);

    static PauliString parse(std::string_view letters);
    static PauliString identity(int nqubits);
    static PauliString single(int nqubits, int qubit, Pauli p);

    int nqubits() const { return static_cast<int>(axes_.size()); }
    Pauli operator[](int qubit) const { return axes_[static_cast<std::size_t>(qubit)]; }
    const std::vector<Pauli>& axes() const { return axes_; }

    std::string str() const;
    bool is_diagonal() const { return flip_ == 0; }
    bool is_identity() const { return flip_ == 0 && zmask_ == 0; }
    int weight() const;

    std::size_t flip_mask() const { return flip_; }
    std::size_t phase_mask() const { return zmask_; }
    cplx phase(std::size_t basis_index) const;

    CMatrix realize() const;

    friend bool operator==(const PauliString& a, const PauliString& b) { return a.axes_ == b.axes_; }
    friend auto operator<=>(const PauliString& a, const PauliString& b) { return a.axes_ <=> b.axes_; }

  private:
    std::vector<Pauli> axes_;
    std::size_t flip_ = 0;   // X or Y
    std::size_t zmask_ = 0;  // Z or Y
    int ycount_ = 0;
};

struct PauliTerm {
    double coefficient;
    PauliString string;
};

/// Real-weighted sum of Pauli strings on a fixed register size. Terms are kept
/// sorted lexicographically (I < X < Y < Z per qubit) with duplicates merged
/// exactly; terms whose merged coefficient is exactly zero are dropped.
class PauliSum {
  public:
    explicit PauliSum(int nqubits);
    PauliSum(int nqubits, std::vector<PauliTerm> terms);

    /// One term per line, `<coefficient> <letters>`; blank lines and lines
    /// starting with '#' are skipped. `nqubits` < 0 infers N from the terms.
    static PauliSum parse(std::string_view text, int nqubits = -1);
    std::string to_text() const;

    int nqubits() const { return nqubits_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    bool is_diagonal() const;

    PauliSum operator+(const PauliSum& other) const;
    PauliSum operator*(double scale) const;

    CMatrix realize() const;
    /// Diagonal of an I/Z-only sum; throws DomainError otherwise.
    RVector realize_diagonal() const;

    /// True when the realised matrix squares to the identity within `tol`.
    bool is_involutory(double tol = 1e-10) const;

  private:
    void canonicalize();

    int nqubits_;
    std::vector<PauliTerm> terms_;
};

/// Throws DimensionError when the register exceeds the qubit cap.
void check_qubit_cap(int nqubits);

/// Largest |eigenvalue| of the realised operator.
double op_norm_inf(const PauliSum& sum);
double min_eigenvalue(const PauliSum& sum);
double max_eigenvalue(const PauliSum& sum);
/// Ascending eigenvalues.
RVector spectrum(const PauliSum& sum);

// Products with Pauli strings, O(d^2) without realising S.
CVector apply(const PauliString& s, const CVector& v);
/// out += coef * S X
void add_left_product(const PauliString& s, cplx coef, const CMatrix& x, CMatrix& out);
/// out += coef * X S
void add_right_product(const PauliString& s, cplx coef, const CMatrix& x, CMatrix& out);
/// out += coef * S X S
void add_conjugation(const PauliString& s, double coef, const CMatrix& x, CMatrix& out);

/// -i c [G, X] for a Pauli-sum generator G.
CMatrix commutator_minus_i(const PauliSum& generator, const CMatrix& x, double scale = 1.0);

}  // namespace nvqo
