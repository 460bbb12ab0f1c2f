#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "nvqo/pauli.hpp"
#include "nvqo/state.hpp"
#include "nvqo/types.hpp"

namespace nvqo {

/// Completely positive map in Kraus form acting on `targets` of a larger
/// register. Every operator is 2^k x 2^k with k = targets.size(); targets[0]
/// is the most significant qubit of the local index.
class KrausChannel {
  public:
    KrausChannel(std::vector<CMatrix> ops, std::vector<int> targets);

    /// Channel over a whole k-qubit register (targets 0..k-1).
    static KrausChannel full(std::vector<CMatrix> ops);
    static KrausChannel identity(std::vector<int> targets);

    std::size_t dim() const { return dim_; }
    int arity() const { return static_cast<int>(targets_.size()); }
    const std::vector<CMatrix>& ops() const { return ops_; }
    const std::vector<int>& targets() const { return targets_; }

    /// || sum_k K_k^dag K_k - I ||_max
    double trace_preservation_error() const;
    bool is_trace_preserving(double tol = 1e-9) const { return trace_preservation_error() <= tol; }

    /// Heisenberg-picture map X -> sum_k K_k^dag X K_k.
    KrausChannel adjoint() const;

  private:
    std::vector<CMatrix> ops_;
    std::vector<int> targets_;
    std::size_t dim_;
};

/// rho -> sum_k p_k S_k rho S_k with full-register Pauli strings.
class PauliChannel {
  public:
    explicit PauliChannel(std::vector<std::pair<double, PauliString>> terms);

    int nqubits() const { return terms_.front().second.nqubits(); }
    const std::vector<std::pair<double, PauliString>>& terms() const { return terms_; }
    KrausChannel to_kraus() const;

  private:
    std::vector<std::pair<double, PauliString>> terms_;
};

using ChannelOp = std::variant<KrausChannel, PauliChannel>;

// ---- construction ---------------------------------------------------------

/// Single Kraus operator exp(-i theta X), built from the eigendecomposition of X.
KrausChannel unitary_channel(const PauliSum& generator, double theta);

/// Local dephasing noise, called "z-depolarizing" in the QAOA noise model:
/// per listed qubit the pair {sqrt(1-eta) I, sqrt(eta) Z},
/// tensored across the qubits. Its action is dephasing, it does not contract
/// the Z component.
KrausChannel z_depolarizing(double eta, const std::vector<int>& qubits);
/// Same channel as a product of per-qubit Pauli channels on an n-qubit register.
std::vector<ChannelOp> z_depolarizing_ops(double eta, int nqubits, const std::vector<int>& qubits);

/// Standard depolarizing channel on k target qubits with Pauli-error
/// probability p spread uniformly over the 4^k - 1 non-identity strings.
PauliChannel depolarizing(double p, int nqubits, const std::vector<int>& qubits);

/// Dephasing-like channel obtained by averaging exp(-i v X) rho exp(i v X)
/// over v ~ Normal(0, sigma^2): {sqrt(1-eta) I, sqrt(eta) X} with
/// eta = (1 - exp(-2 sigma^2)) / 2. Requires X^2 = I.
KrausChannel gaussian_fluctuation_channel(const PauliSum& generator, double sigma);
double gaussian_fluctuation_eta(double sigma);

/// Zero-temperature amplitude + phase damping over a gate of duration t:
/// populations relax to |0> with p_reset = 1 - exp(-t/T1) and coherences
/// decay by exp(-t/T2). Requires T1 > 0, 0 < T2 <= 2 T1, t >= 0.
KrausChannel thermal_relaxation(double t1, double t2, double gate_time, int qubit);

// ---- application ----------------------------------------------------------

/// sum_k K_k x K_k^dag on an n-qubit operator (n >= every target + 1). Works
/// for any square x, Hermitian or not.
CMatrix apply(const KrausChannel& channel, const CMatrix& x);
CMatrix apply(const PauliChannel& channel, const CMatrix& x);
CMatrix apply(const ChannelOp& op, const CMatrix& x);
/// Heisenberg picture of `op`.
CMatrix apply_adjoint(const ChannelOp& op, const CMatrix& x);

/// State-level application: trace preserved within 1e-9 (NumericalError otherwise).
DensityMatrix apply(const KrausChannel& channel, const DensityMatrix& rho);

/// Kraus products B_j A_i: the channel B o A on identical targets.
KrausChannel compose(const KrausChannel& after, const KrausChannel& before);

// ---- Choi representation and distances ------------------------------------

/// J(E) = sum_ij |i><j| (x) E(|i><j|) for a linear map on d x d matrices.
CMatrix choi_of_map(std::size_t dim, const std::function<CMatrix(const CMatrix&)>& map);
CMatrix choi(const KrausChannel& channel);

struct DistanceBounds {
    double lower;
    double upper;
};

/// Two-sided bracket of the diamond distance from the Choi difference:
/// ||J(A)-J(B)||_1 / d <= ||A - B||_diamond <= ||J(A)-J(B)||_1.
DistanceBounds channel_distance_bounds(const KrausChannel& a, const KrausChannel& b);
DistanceBounds choi_distance_bounds(const CMatrix& choi_a, const CMatrix& choi_b, std::size_t dim);

/// Trace distance between the normalised Choi states of (a) the empirical
/// average of exp(-i v X) . exp(i v X) over `samples` draws v ~ Normal(theta, sigma^2)
/// and (b) gaussian_fluctuation_channel(X, sigma) following the unitary at theta.
double monte_carlo_fluctuation_check(const PauliSum& generator, double sigma, int samples, std::uint64_t seed,
                                     double theta = 0.0);

}  // namespace nvqo
