#include "nvqo/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "nvqo/error.hpp"
#include "nvqo/rng.hpp"

namespace nvqo {
namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::vector<int> primes(int count) {
    std::vector<int> out;
    for (int c = 2; static_cast<int>(out.size()) < count; ++c) {
        bool prime = true;
        for (int p : out) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) out.push_back(c);
    }
    return out;
}

double radical_inverse(std::uint64_t index, int base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
        f /= base;
    }
    return result;
}

// Upper bound on ||N - id||_diamond from the Choi matrix of N on its own support.
double local_noise_bound(const ChannelOp& op) {
    if (const auto* k = std::get_if<KrausChannel>(&op)) {
        return channel_distance_bounds(*k, KrausChannel::identity(k->targets())).upper;
    }
    const auto& pauli = std::get<PauliChannel>(op);
    std::size_t support = 0;
    double p_identity = 0.0;
    for (const auto& [p, s] : pauli.terms()) {
        support |= s.flip_mask() | s.phase_mask();
        if (s.is_identity()) p_identity += p;
    }
    // Choi vectors of distinct Pauli strings are orthogonal with norm^2 = d,
    // so ||J(N) - J(id)||_1 = 2 d (1 - p_I).
    const double d = std::ldexp(1.0, std::popcount(support));
    return 2.0 * d * std::max(0.0, 1.0 - p_identity);
}

// Diamond distance between exp(-i a G) and exp(-i b G) channels is at most
// 2 max_x |exp(-i a x) - exp(-i b x)| over eigenvalues x of G.
double unitary_drift_bound(const PauliSum& generator, double a, double b) {
    if (a == b) return 0.0;
    const GeneratorExp exp(generator);
    const RVector& x = exp.eigenvalues();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) worst = std::max(worst, 2.0 * std::abs(std::sin(0.5 * (a - b) * x[i])));
    return 2.0 * worst;
}

void apply_gate(const NoisyGate& gate, CMatrix& x, double theta) {
    for (const auto& step : gate.steps) {
        step.unitary.conjugate(x, theta);
        for (const auto& op : step.noise) x = nvqo::apply(op, x);
    }
}

double direct_gate_bound(const NoisyGate& noisy, double vartheta, const NoisyGate& ideal, double theta,
                         std::size_t dim) {
    const CMatrix jn = choi_of_map(dim, [&](const CMatrix& x) {
        CMatrix y = x;
        apply_gate(noisy, y, vartheta);
        return y;
    });
    const CMatrix ji = choi_of_map(dim, [&](const CMatrix& x) {
        CMatrix y = x;
        apply_gate(ideal, y, theta);
        return y;
    });
    return choi_distance_bounds(jn, ji, dim).upper;
}

double local_gate_bound(const NoisyGate& noisy, double vartheta, const NoisyGate& ideal, double theta) {
    if (!ideal.noiseless()) throw DomainError("peeling_upper: reference gates must be noiseless");
    double bound = unitary_drift_bound(ideal.generator, vartheta, theta);
    for (const auto& step : noisy.steps) {
        for (const auto& op : step.noise) bound += local_noise_bound(op);
    }
    return bound;
}

}  // namespace

double err(const ParametricCircuit& noisy, const RVector& vartheta, const ParametricCircuit& ideal,
           const RVector& theta, const PauliSum& h) {
    if (noisy.nqubits() != ideal.nqubits() || h.nqubits() != noisy.nqubits()) {
        throw DimensionError("err: circuits and observable differ in size");
    }
    return cost(noisy, h, vartheta) - cost(ideal, h, theta);
}

PeelingBound peeling_upper(const ParametricCircuit& noisy, const RVector& vartheta, const ParametricCircuit& ideal,
                           const RVector& theta, const PauliSum& h, PeelingMode mode) {
    if (noisy.nparams() != ideal.nparams()) throw DimensionError("peeling_upper: gate counts differ");
    if (noisy.nqubits() != ideal.nqubits() || h.nqubits() != noisy.nqubits()) {
        throw DimensionError("peeling_upper: circuits and observable differ in size");
    }
    if (vartheta.size() != noisy.nparams() || theta.size() != ideal.nparams()) {
        throw DimensionError("peeling_upper: parameter vectors have the wrong length");
    }
    if (mode == PeelingMode::Auto) mode = noisy.nqubits() <= 4 ? PeelingMode::Direct : PeelingMode::Local;
    if (mode == PeelingMode::Direct) check_qubit_cap(2 * noisy.nqubits());
    PeelingBound out;
    for (int k = 0; k < noisy.nparams(); ++k) {
        const auto& gn = noisy.gates()[static_cast<std::size_t>(k)];
        const auto& gi = ideal.gates()[static_cast<std::size_t>(k)];
        double b = local_gate_bound(gn, vartheta[k], gi, theta[k]);
        // Both are valid upper bounds; keep the tighter one.
        if (mode == PeelingMode::Direct) b = std::min(b, direct_gate_bound(gn, vartheta[k], gi, theta[k], noisy.dim()));
        out.per_gate.push_back(b);
    }
    const double hn = op_norm_inf(h);
    double sum = 0.0, worst = 0.0;
    for (double b : out.per_gate) {
        sum += b;
        worst = std::max(worst, b);
    }
    out.sum_form = hn * sum;
    out.max_form = hn * static_cast<double>(out.per_gate.size()) * worst;
    return out;
}

double fidelity_upper(const PureState& psi, const DensityMatrix& rho, const PauliSum& h) {
    if (psi.nqubits() != rho.nqubits() || h.nqubits() != rho.nqubits()) {
        throw DimensionError("fidelity_upper: size mismatch");
    }
    const double f = fidelity_pure(psi, rho);
    return 2.0 * op_norm_inf(h) * std::sqrt(std::max(0.0, 1.0 - f));
}

std::vector<RVector> halton_probes(int nparams, int count, std::uint64_t seed) {
    if (nparams < 1 || count < 1) throw DomainError("halton_probes: need nparams >= 1 and count >= 1");
    const auto bases = primes(nparams);
    Rng rng(seed);
    RVector shift(nparams);
    for (int j = 0; j < nparams; ++j) shift[j] = rng.uniform();
    std::vector<RVector> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        RVector p(nparams);
        for (int j = 0; j < nparams; ++j) {
            double u = radical_inverse(static_cast<std::uint64_t>(i + 1), bases[static_cast<std::size_t>(j)]) + shift[j];
            u -= std::floor(u);
            p[j] = 2.0 * kPi * u;
        }
        out.push_back(std::move(p));
    }
    return out;
}

ProbeStatistics probe_statistics(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h,
                                 const LambdaPolicy& policy) {
    const EvolvedState st = evolve_with_derivatives(circuit, theta);
    const CMatrix& rho = st.rho.matrix();
    const SldSolver solver(rho);
    const MeasurementBasis basis(h);
    const int p = circuit.nparams();
    ProbeStatistics out{RVector(p), RVector(p), RVector(p)};
    for (int j = 0; j < p; ++j) {
        const CMatrix& d = st.derivatives[static_cast<std::size_t>(j)];
        const SldResult sld = solver.solve(d);
        out.qfi[j] = sld.qfi;
        out.sld_second_moment[j] =
            sld_outcomes(rho, gradient_observable(h, sld, policy.resolve(rho, h, sld))).second_moment();
        out.ld_second_moment[j] = ld_outcomes(basis, rho, d).second_moment();
    }
    return out;
}

double G2Empirical::root() const { return std::sqrt(second_moment); }

G2Empirical g2_empirical(const ParametricCircuit& circuit, const std::vector<RVector>& probes, EstimatorKind kind,
                         const LambdaPolicy& policy, const PauliSum& h, int enumeration_qubit_cap,
                         std::uint64_t seed) {
    if (probes.empty()) throw DomainError("g2_empirical: empty probe set");
    G2Empirical out;
    const bool fallback = circuit.nqubits() > enumeration_qubit_cap && kind != EstimatorKind::Hadamard;
    out.sampled_fallback = fallback;
    constexpr int kFallbackShots = 100000;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        double total = 0.0;
        if (!fallback) {
            total = estimator_moments(kind, circuit, probes[i], h, policy).total_second_moment();
        } else {
            const EvolvedState st = evolve_with_derivatives(circuit, probes[i]);
            const CMatrix& rho = st.rho.matrix();
            const SldSolver solver(rho);
            const MeasurementBasis basis(h);
            for (int j = 0; j < circuit.nparams(); ++j) {
                const CMatrix& d = st.derivatives[static_cast<std::size_t>(j)];
                OutcomeDistribution dist;
                if (kind == EstimatorKind::SLD) {
                    const SldResult sld = solver.solve(d);
                    dist = sld_outcomes(rho, gradient_observable(h, sld, policy.resolve(rho, h, sld)));
                } else {
                    dist = ld_outcomes(basis, rho, d);
                }
                DiscreteSampler sampler(dist.probabilities);
                Rng rng(derive_seed(derive_seed(seed, i), static_cast<std::uint64_t>(j)));
                double acc = 0.0;
                for (int s = 0; s < kFallbackShots; ++s) {
                    const double v = dist.values[static_cast<Eigen::Index>(sampler(rng))];
                    acc += v * v;
                }
                total += acc / kFallbackShots;
            }
        }
        if (i == 0 || total > out.second_moment) {
            out.second_moment = total;
            out.argmax = i;
        }
    }
    return out;
}

G2QfiUpper g2_qfi_upper(const ParametricCircuit& circuit, const std::vector<RVector>& probes, const PauliSum& h) {
    if (probes.empty()) throw DomainError("g2_qfi_upper: empty probe set");
    G2QfiUpper out;
    for (const auto& theta : probes) out.max_qfi = std::max(out.max_qfi, qfi_vector(circuit, theta).maxCoeff());
    out.bound = std::sqrt(static_cast<double>(circuit.nparams())) * op_norm_inf(h) * std::sqrt(out.max_qfi);
    return out;
}

double default_radius(int nparams) { return kPi * std::sqrt(static_cast<double>(nparams)); }

double BoundReport::g_empirical() const { return std::sqrt(g2_empirical); }
double BoundReport::g_qfi_upper() const { return std::sqrt(g2_qfi_upper); }

double BoundReport::assembled_rhs(double iterations) const { return assembled_bound(*this, radius, iterations); }

double BoundReport::crossover_iterations() const {
    if (err <= 0.0) return std::numeric_limits<double>::infinity();
    const double r = radius * g_qfi_upper() / err;
    return r * r;
}

std::vector<std::pair<std::string, std::string>> BoundReport::to_record() const {
    return {
        {"err", fmt(err)},
        {"err_negative", err_negative() ? "true" : "false"},
        {"err_peeling_upper", fmt(err_peeling_upper)},
        {"err_peeling_upper_max_form", fmt(err_peeling_upper_max_form)},
        {"err_fidelity_upper", fmt(err_fidelity_upper)},
        {"g2_empirical", fmt(g2_empirical)},
        {"g2_qfi_upper", fmt(g2_qfi_upper)},
        {"g_empirical", fmt(g_empirical())},
        {"g_qfi_upper", fmt(g_qfi_upper())},
        {"g2_fallback", g2_fallback ? "true" : "false"},
        {"radius", fmt(radius)},
        {"crossover_iterations", fmt(crossover_iterations())},
        {"probe_set_size", std::to_string(probe_set_size)},
        {"seed", std::to_string(seed)},
        {"estimator", estimator},
    };
}

std::string BoundReport::to_text() const {
    std::string out;
    for (const auto& [k, v] : to_record()) out += k + "=" + v + "\n";
    return out;
}

double assembled_bound(const BoundReport& report, double radius, double iterations) {
    if (!(iterations >= 1.0)) throw DomainError("assembled_bound: iterations must be >= 1");
    if (!(radius > 0.0)) throw DomainError("assembled_bound: R must be positive");
    return report.err + radius * report.g_qfi_upper() / std::sqrt(iterations);
}

}  // namespace nvqo
