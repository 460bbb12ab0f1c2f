#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nvqo/ansatz.hpp"
#include "nvqo/state.hpp"

namespace nvqo {

/// Symmetric logarithmic derivative L with d rho = (L rho + rho L) / 2.
struct SldResult {
    CMatrix L;
    int support_dim = 0;  // number of retained (m, n) eigenvalue pairs
    double qfi = 0.0;     // Tr[rho L^2]
};

/// Eigendecomposes rho once and solves for any number of derivatives.
class SldSolver {
  public:
    explicit SldSolver(const CMatrix& rho);

    /// Pairs with rho_m + rho_n <= cutoff() get L_mn = 0.
    SldResult solve(const CMatrix& drho) const;

    const RVector& eigenvalues() const { return evals_; }
    const CMatrix& eigenvectors() const { return evecs_; }
    double cutoff() const { return cutoff_; }

  private:
    RVector evals_;
    CMatrix evecs_;
    double cutoff_;
};

SldResult solve_sld(const DensityMatrix& rho, const CMatrix& drho);

/// ||(L rho + rho L)/2 - d rho||_F
double sld_residual(const CMatrix& rho, const CMatrix& drho, const CMatrix& L);

RVector qfi_vector(const ParametricCircuit& circuit, const RVector& theta);

/// {L, H}/2 + lambda L
CMatrix gradient_observable(const PauliSum& h, const SldResult& sld, double lambda);

/// <{L, {H, L}}>
double baseline_numerator(const CMatrix& rho, const PauliSum& h, const CMatrix& L);
/// Minimiser of E[g^2](lambda) = <({H,L}/2)^2> + lambda <{L,{H,L}}>/2 + lambda^2 QFI.
/// Throws DomainError when QFI <= 1e-12.
double optimal_baseline(const DensityMatrix& rho, const PauliSum& h, const SldResult& sld);

enum class EstimatorKind { SLD, LD, Hadamard };
std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& text);

struct LambdaPolicy {
    enum class Mode { Zero, Optimal, Fixed };
    Mode mode = Mode::Zero;
    double value = 0.0;

    static LambdaPolicy zero() { return {}; }
    static LambdaPolicy optimal() { return {Mode::Optimal, 0.0}; }
    static LambdaPolicy fixed(double v) { return {Mode::Fixed, v}; }
    /// Baseline to use for one component; Optimal falls back to 0 when QFI vanishes.
    double resolve(const CMatrix& rho, const PauliSum& h, const SldResult& sld) const;
};
std::string to_string(const LambdaPolicy& policy);

struct GradientSample {
    RVector values;
    EstimatorKind kind = EstimatorKind::SLD;
    long shots_used = 0;
};

/// Single-shot outcome distribution of one gradient component.
struct OutcomeDistribution {
    RVector values;
    std::vector<double> probabilities;

    double mean() const;
    double second_moment() const;
};

/// Eigenvalues of g_obs with Born probabilities under rho.
OutcomeDistribution sld_outcomes(const CMatrix& rho, const CMatrix& g_obs);
/// y -> E_y d_j p(y) / p(y); outcomes with p(y) <= 1e-14 are dropped.
OutcomeDistribution ld_outcomes(const MeasurementBasis& basis, const CMatrix& rho, const CMatrix& drho);

/// Exact per-component mean and second moment of a single-shot estimate.
struct GradientMoments {
    RVector mean;
    RVector second_moment;

    double total_second_moment() const { return second_moment.sum(); }
};

GradientMoments sld_moments(const EvolvedState& state, const PauliSum& h, const LambdaPolicy& policy);
GradientMoments ld_moments(const EvolvedState& state, const PauliSum& h);
/// One shot per (mu, nu) Hadamard-test term.
GradientMoments hadamard_moments(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h);
GradientMoments estimator_moments(EstimatorKind kind, const ParametricCircuit& circuit, const RVector& theta,
                                  const PauliSum& h, const LambdaPolicy& policy);

// shots == 0 selects exact-expectation mode in every sampler below.

GradientSample sample_sld_gradient(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h,
                                   int shots, const LambdaPolicy& policy, std::uint64_t seed);
GradientSample sample_ld_gradient(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h,
                                  int shots, std::uint64_t seed);

/// Probability of ancilla outcome 0 in the Hadamard test for
/// Im <psi0| U_{1:k}^dag Q U_{k+1:P}^dag P U_{1:P} |psi0>, simulated on N+1 qubits.
struct HadamardTerm {
    int k;
    double weight;  // 2 beta_mu alpha_nu
    double p0;
};
std::vector<HadamardTerm> hadamard_terms(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h);

GradientSample hadamard_test_gradient(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h,
                                      int shots, std::uint64_t seed);

GradientSample sample_gradient(EstimatorKind kind, const ParametricCircuit& circuit, const RVector& theta,
                               const PauliSum& h, int shots, const LambdaPolicy& policy, std::uint64_t seed);

/// Mean of `shots` Born samples of H; shots == 0 returns Tr[rho H].
double sample_cost(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h, int shots,
                   std::uint64_t seed);
double sample_cost(const DensityMatrix& rho, const MeasurementBasis& basis, int shots, std::uint64_t seed);

}  // namespace nvqo
