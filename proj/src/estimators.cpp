#include "nvqo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "nvqo/error.hpp"
#include "nvqo/rng.hpp"

namespace nvqo {
namespace {

// {H, X} for Hermitian X.
CMatrix anticommutator(const PauliSum& h, const CMatrix& x) {
    if (h.is_diagonal()) {
        const RVector diag = h.realize_diagonal();
        CMatrix out(x.rows(), x.cols());
        for (Eigen::Index b = 0; b < x.cols(); ++b) {
            for (Eigen::Index a = 0; a < x.rows(); ++a) out(a, b) = (diag[a] + diag[b]) * x(a, b);
        }
        return out;
    }
    const CMatrix hm = h.realize();
    return hm * x + x * hm;
}

double real_trace_product(const CMatrix& rho, const CMatrix& hermitian) { return trace_product(rho, hermitian).real(); }

void check_shots(int shots) {
    if (shots < 0) throw DomainError("shots must be >= 0");
}

double sample_mean(const OutcomeDistribution& dist, int shots, std::uint64_t seed) {
    DiscreteSampler sampler(dist.probabilities);
    Rng rng(seed);
    double sum = 0.0;
    for (int s = 0; s < shots; ++s) sum += dist.values[static_cast<Eigen::Index>(sampler(rng))];
    return sum / shots;
}

}  // namespace

SldSolver::SldSolver(const CMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of rho failed");
    evals_ = eig.eigenvalues();
    evecs_ = eig.eigenvectors();
    cutoff_ = 1e-12 * 2.0 * evals_.maxCoeff();
}

SldResult SldSolver::solve(const CMatrix& drho) const {
    const auto d = evals_.size();
    if (drho.rows() != d || drho.cols() != d) throw DimensionError("solve_sld: d rho has the wrong size");
    const double scale = std::max(1.0, drho.cwiseAbs().maxCoeff());
    if ((drho - drho.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale) throw DomainError("solve_sld: d rho is not Hermitian");
    if (std::abs(drho.trace()) > 1e-8 * scale) throw DomainError("solve_sld: d rho is not traceless");

    const CMatrix m = evecs_.adjoint() * drho * evecs_;
    CMatrix l_eig = CMatrix::Zero(d, d);
    SldResult out;
    for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index k = 0; k < d; ++k) {
            const double s = evals_[k] + evals_[n];
            if (s <= cutoff_) continue;
            l_eig(k, n) = 2.0 * m(k, n) / s;
            out.qfi += 2.0 * std::norm(m(k, n)) / s;
            ++out.support_dim;
        }
    }
    out.L = evecs_ * l_eig * evecs_.adjoint();
    hermitize(out.L);
    return out;
}

SldResult solve_sld(const DensityMatrix& rho, const CMatrix& drho) { return SldSolver(rho.matrix()).solve(drho); }

double sld_residual(const CMatrix& rho, const CMatrix& drho, const CMatrix& L) {
    return (0.5 * (L * rho + rho * L) - drho).norm();
}

RVector qfi_vector(const ParametricCircuit& circuit, const RVector& theta) {
    const EvolvedState st = evolve_with_derivatives(circuit, theta);
    const SldSolver solver(st.rho.matrix());
    RVector out(circuit.nparams());
    for (int j = 0; j < circuit.nparams(); ++j) out[j] = solver.solve(st.derivatives[static_cast<std::size_t>(j)]).qfi;
    return out;
}

CMatrix gradient_observable(const PauliSum& h, const SldResult& sld, double lambda) {
    if (static_cast<std::size_t>(sld.L.rows()) != dim_of(h.nqubits())) {
        throw DimensionError("gradient_observable: H and L differ in size");
    }
    CMatrix g = 0.5 * anticommutator(h, sld.L);
    if (lambda != 0.0) g += lambda * sld.L;
    hermitize(g);
    return g;
}

double baseline_numerator(const CMatrix& rho, const PauliSum& h, const CMatrix& L) {
    const CMatrix a = anticommutator(h, L);
    CMatrix b = L * a + a * L;
    hermitize(b);
    return real_trace_product(rho, b);
}

double optimal_baseline(const DensityMatrix& rho, const PauliSum& h, const SldResult& sld) {
    if (sld.qfi <= 1e-12) throw DomainError("optimal baseline undefined: QFI vanishes");
    return -baseline_numerator(rho.matrix(), h, sld.L) / (4.0 * sld.qfi);
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::SLD: return "SLD";
        case EstimatorKind::LD: return "LD";
        case EstimatorKind::Hadamard: return "HADAMARD";
    }
    return "?";
}

EstimatorKind parse_estimator_kind(const std::string& text) {
    if (text == "SLD" || text == "sld") return EstimatorKind::SLD;
    if (text == "LD" || text == "ld") return EstimatorKind::LD;
    if (text == "HADAMARD" || text == "hadamard") return EstimatorKind::Hadamard;
    throw ConfigError("unknown estimator '" + text + "'");
}

double LambdaPolicy::resolve(const CMatrix& rho, const PauliSum& h, const SldResult& sld) const {
    switch (mode) {
        case Mode::Zero: return 0.0;
        case Mode::Fixed: return value;
        case Mode::Optimal:
            if (sld.qfi <= 1e-12) return 0.0;
            return -baseline_numerator(rho, h, sld.L) / (4.0 * sld.qfi);
    }
    return 0.0;
}

std::string to_string(const LambdaPolicy& policy) {
    switch (policy.mode) {
        case LambdaPolicy::Mode::Zero: return "zero";
        case LambdaPolicy::Mode::Optimal: return "optimal";
        case LambdaPolicy::Mode::Fixed: return "fixed(" + std::to_string(policy.value) + ")";
    }
    return "?";
}

double OutcomeDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) m += probabilities[i] * values[static_cast<Eigen::Index>(i)];
    return m;
}

double OutcomeDistribution::second_moment() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double v = values[static_cast<Eigen::Index>(i)];
        m += probabilities[i] * v * v;
    }
    return m;
}

OutcomeDistribution sld_outcomes(const CMatrix& rho, const CMatrix& g_obs) {
    const MeasurementBasis basis(g_obs);
    return {basis.energies(), born_probabilities(basis.diagonal_of(rho))};
}

OutcomeDistribution ld_outcomes(const MeasurementBasis& basis, const CMatrix& rho, const CMatrix& drho) {
    const auto p = born_probabilities(basis.diagonal_of(rho));
    const RVector dp = basis.diagonal_of(drho);
    std::vector<double> values, probs;
    for (std::size_t y = 0; y < p.size(); ++y) {
        if (p[y] <= 1e-14) continue;
        const auto yi = static_cast<Eigen::Index>(y);
        values.push_back(basis.energies()[yi] * dp[yi] / p[y]);
        probs.push_back(p[y]);
    }
    OutcomeDistribution out;
    out.values = Eigen::Map<const RVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    out.probabilities = std::move(probs);
    return out;
}

GradientMoments sld_moments(const EvolvedState& state, const PauliSum& h, const LambdaPolicy& policy) {
    const auto p = static_cast<Eigen::Index>(state.derivatives.size());
    const CMatrix& rho = state.rho.matrix();
    const SldSolver solver(rho);
    GradientMoments out{RVector(p), RVector(p)};
    for (Eigen::Index j = 0; j < p; ++j) {
        const SldResult sld = solver.solve(state.derivatives[static_cast<std::size_t>(j)]);
        const auto dist = sld_outcomes(rho, gradient_observable(h, sld, policy.resolve(rho, h, sld)));
        out.mean[j] = dist.mean();
        out.second_moment[j] = dist.second_moment();
    }
    return out;
}

GradientMoments ld_moments(const EvolvedState& state, const PauliSum& h) {
    const auto p = static_cast<Eigen::Index>(state.derivatives.size());
    const MeasurementBasis basis(h);
    GradientMoments out{RVector(p), RVector(p)};
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto dist = ld_outcomes(basis, state.rho.matrix(), state.derivatives[static_cast<std::size_t>(j)]);
        out.mean[j] = dist.mean();
        out.second_moment[j] = dist.second_moment();
    }
    return out;
}

GradientMoments hadamard_moments(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h) {
    const auto p = circuit.nparams();
    GradientMoments out{RVector::Zero(p), RVector::Zero(p)};
    RVector variance = RVector::Zero(p);
    for (const auto& t : hadamard_terms(circuit, theta, h)) {
        const double m = 2.0 * t.p0 - 1.0;  // mean of the +-1 outcome
        out.mean[t.k] += t.weight * m;
        variance[t.k] += t.weight * t.weight * (1.0 - m * m);
    }
    out.second_moment = variance + out.mean.cwiseAbs2();
    return out;
}

GradientMoments estimator_moments(EstimatorKind kind, const ParametricCircuit& circuit, const RVector& theta,
                                  const PauliSum& h, const LambdaPolicy& policy) {
    switch (kind) {
        case EstimatorKind::SLD: return sld_moments(evolve_with_derivatives(circuit, theta), h, policy);
        case EstimatorKind::LD: return ld_moments(evolve_with_derivatives(circuit, theta), h);
        case EstimatorKind::Hadamard: return hadamard_moments(circuit, theta, h);
    }
    throw DomainError("unknown estimator");
}

GradientSample sample_sld_gradient(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h,
                                   int shots, const LambdaPolicy& policy, std::uint64_t seed) {
    check_shots(shots);
    const EvolvedState st = evolve_with_derivatives(circuit, theta);
    const CMatrix& rho = st.rho.matrix();
    const SldSolver solver(rho);
    GradientSample out{RVector(circuit.nparams()), EstimatorKind::SLD, 0};
    for (int j = 0; j < circuit.nparams(); ++j) {
        const SldResult sld = solver.solve(st.derivatives[static_cast<std::size_t>(j)]);
        const CMatrix g = gradient_observable(h, sld, policy.resolve(rho, h, sld));
        if (shots == 0) {
            out.values[j] = real_trace_product(rho, g);
        } else {
            out.values[j] = sample_mean(sld_outcomes(rho, g), shots, derive_seed(seed, static_cast<std::uint64_t>(j)));
            out.shots_used += shots;
        }
    }
    return out;
}

GradientSample sample_ld_gradient(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h,
                                  int shots, std::uint64_t seed) {
    check_shots(shots);
    const EvolvedState st = evolve_with_derivatives(circuit, theta);
    const MeasurementBasis basis(h);
    const auto p = born_probabilities(basis.diagonal_of(st.rho.matrix()));
    std::vector<RVector> dp;
    for (const auto& d : st.derivatives) dp.push_back(basis.diagonal_of(d));
    GradientSample out{RVector::Zero(circuit.nparams()), EstimatorKind::LD, shots};
    if (shots == 0) {
        for (int j = 0; j < circuit.nparams(); ++j) out.values[j] = basis.energies().dot(dp[static_cast<std::size_t>(j)]);
        return out;
    }
    // One outcome y serves every component.
    DiscreteSampler sampler(p);
    Rng rng(seed);
    for (int s = 0; s < shots; ++s) {
        const std::size_t y = sampler(rng);
        if (p[y] <= 1e-14) throw NumericalError("LD estimator sampled an outcome outside the support");
        const auto yi = static_cast<Eigen::Index>(y);
        const double e = basis.energies()[yi];
        for (int j = 0; j < circuit.nparams(); ++j) out.values[j] += e * dp[static_cast<std::size_t>(j)][yi] / p[y];
    }
    out.values /= shots;
    return out;
}

std::vector<HadamardTerm> hadamard_terms(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h) {
    if (!circuit.noiseless()) {
        throw UnsupportedError("the Hadamard-test estimator is only defined for noiseless circuits");
    }
    if (theta.size() != circuit.nparams()) throw DimensionError("parameter vector has the wrong length");
    if (h.nqubits() != circuit.nqubits()) throw DimensionError("observable size does not match the circuit");
    const auto& gates = circuit.gates();
    const int p = circuit.nparams();
    auto run_gates = [&](CVector& v, int from, int to) {
        for (int j = from; j < to; ++j) {
            for (const auto& step : gates[static_cast<std::size_t>(j)].steps) step.unitary.apply(v, theta[j]);
        }
    };
    CVector final_state = circuit.initial_state().amplitudes();
    run_gates(final_state, 0, p);

    const auto d = static_cast<Eigen::Index>(circuit.dim());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<HadamardTerm> out;
    CVector prefix = circuit.initial_state().amplitudes();
    CVector reg(2 * d);
    for (int k = 0; k < p; ++k) {
        run_gates(prefix, k, k + 1);  // U_{1:k} psi0
        for (const auto& q : gates[static_cast<std::size_t>(k)].generator.terms()) {
            CVector branch = nvqo::apply(q.string, prefix);  // controlled Q
            run_gates(branch, k + 1, p);
            for (const auto& pt : h.terms()) {
                // ancilla (most significant qubit) in |+>, register branches after controlled P
                reg.head(d) = inv_sqrt2 * final_state;
                reg.tail(d) = inv_sqrt2 * nvqo::apply(pt.string, branch);
                // Rx(pi/2) on the ancilla: (1/sqrt2) [[1, -i], [-i, 1]]
                const CVector zero_branch = inv_sqrt2 * (reg.head(d) - cplx(0, 1) * reg.tail(d));
                const double p0 = std::clamp(zero_branch.squaredNorm(), 0.0, 1.0);
                out.push_back({k, 2.0 * q.coefficient * pt.coefficient, p0});
            }
        }
    }
    return out;
}

GradientSample hadamard_test_gradient(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h,
                                      int shots, std::uint64_t seed) {
    check_shots(shots);
    const auto terms = hadamard_terms(circuit, theta, h);
    GradientSample out{RVector::Zero(circuit.nparams()), EstimatorKind::Hadamard, 0};
    Rng rng(seed);
    for (const auto& t : terms) {
        double m;
        if (shots == 0) {
            m = 2.0 * t.p0 - 1.0;
        } else {
            std::binomial_distribution<int> coin(shots, t.p0);
            m = 2.0 * coin(rng.engine()) / shots - 1.0;
            out.shots_used += shots;
        }
        out.values[t.k] += t.weight * m;
    }
    return out;
}

GradientSample sample_gradient(EstimatorKind kind, const ParametricCircuit& circuit, const RVector& theta,
                               const PauliSum& h, int shots, const LambdaPolicy& policy, std::uint64_t seed) {
    switch (kind) {
        case EstimatorKind::SLD: return sample_sld_gradient(circuit, theta, h, shots, policy, seed);
        case EstimatorKind::LD: return sample_ld_gradient(circuit, theta, h, shots, seed);
        case EstimatorKind::Hadamard: return hadamard_test_gradient(circuit, theta, h, shots, seed);
    }
    throw DomainError("unknown estimator");
}

double sample_cost(const DensityMatrix& rho, const MeasurementBasis& basis, int shots, std::uint64_t seed) {
    check_shots(shots);
    if (shots == 0) return basis.energies().dot(basis.diagonal_of(rho.matrix()));
    double sum = 0.0;
    for (const auto& o : sample_outcomes(rho, basis, shots, seed)) sum += o.energy;
    return sum / shots;
}

double sample_cost(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h, int shots,
                   std::uint64_t seed) {
    return sample_cost(evolve(circuit, theta), MeasurementBasis(h), shots, seed);
}

}  // namespace nvqo
