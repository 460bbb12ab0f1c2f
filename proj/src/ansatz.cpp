#include "nvqo/ansatz.hpp"

#include <cmath>
#include <sstream>

#include "nvqo/error.hpp"
#include "nvqo/rng.hpp"

namespace nvqo {
namespace {

std::vector<int> all_qubits(int n) {
    std::vector<int> q(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i)] = i;
    return q;
}

std::vector<int> support(const PauliString& s) {
    std::vector<int> out;
    for (int q = 0; q < s.nqubits(); ++q) {
        if (s[q] != Pauli::I) out.push_back(q);
    }
    return out;
}

bool strings_commute(const PauliString& a, const PauliString& b) {
    int anti = 0;
    for (int q = 0; q < a.nqubits(); ++q) {
        if (a[q] != Pauli::I && b[q] != Pauli::I && a[q] != b[q]) ++anti;
    }
    return anti % 2 == 0;
}

double broadcast(const std::vector<double>& values, int qubit, const char* what) {
    if (values.empty()) throw ConfigError(std::string("thermal relaxation: missing ") + what);
    if (values.size() == 1) return values.front();
    if (static_cast<std::size_t>(qubit) >= values.size()) {
        throw ConfigError(std::string("thermal relaxation: too few ") + what + " entries");
    }
    return values[static_cast<std::size_t>(qubit)];
}

void add_thermal(std::vector<ChannelOp>& ops, double t1, double t2, double time, int qubit) {
    if (time <= 0.0 || std::isinf(t1)) return;
    ops.emplace_back(thermal_relaxation(t1, t2, time, qubit));
}

std::vector<ChannelOp> layer_noise(const NoiseSpec& noise, const PauliSum& generator, int gate_index) {
    const int n = generator.nqubits();
    std::vector<ChannelOp> ops;
    if (const auto* z = std::get_if<ZDepolarizing>(&noise)) {
        ops = z_depolarizing_ops(z->eta, n, all_qubits(n));
    } else if (const auto* g = std::get_if<GaussianFluctuation>(&noise)) {
        const double eta = gaussian_fluctuation_eta(g->sigma);
        if (eta == 0.0) return ops;
        const auto& terms = generator.terms();
        if (terms.size() == 1 && std::abs(std::abs(terms.front().coefficient) - 1.0) <= 1e-12) {
            ops.emplace_back(PauliChannel({{1.0 - eta, PauliString::identity(n)}, {eta, terms.front().string}}));
        } else if (generator.is_involutory(1e-10)) {
            ops.emplace_back(gaussian_fluctuation_channel(generator, g->sigma));
        } else if (g->mc_samples > 0) {
            const GeneratorExp exp(generator);
            Rng rng(derive_seed(g->seed, static_cast<std::uint64_t>(gate_index)));
            const double w = std::sqrt(1.0 / g->mc_samples);
            std::vector<CMatrix> kraus;
            kraus.reserve(static_cast<std::size_t>(g->mc_samples));
            for (int s = 0; s < g->mc_samples; ++s) kraus.push_back(w * exp.matrix(rng.normal(0.0, g->sigma)));
            ops.emplace_back(KrausChannel::full(std::move(kraus)));
        } else {
            throw DomainError("gaussian fluctuation needs an involutory generator or mc_samples > 0");
        }
    } else if (const auto* t = std::get_if<ThermalRelaxation>(&noise)) {
        for (int q = 0; q < n; ++q) {
            add_thermal(ops, broadcast(t->t1, q, "T1"), broadcast(t->t2, q, "T2"), t->gate_time, q);
        }
    }
    return ops;
}

NoisyGate device_gate(const DeviceNoise& noise, const PauliSum& generator) {
    const int n = generator.nqubits();
    const auto& terms = generator.terms();
    for (std::size_t a = 0; a < terms.size(); ++a) {
        for (std::size_t b = a + 1; b < terms.size(); ++b) {
            if (!strings_commute(terms[a].string, terms[b].string)) {
                throw UnsupportedError("device noise needs a generator made of commuting Pauli terms");
            }
        }
    }
    NoisyGate gate{generator, {}};
    for (const auto& term : terms) {
        if (term.string.is_identity()) continue;  // global phase
        const auto qubits = support(term.string);
        if (qubits.size() > 2) throw UnsupportedError("device noise supports one- and two-qubit terms only");
        const GateParams params =
            noise.table.gate(qubits.size() == 1 ? noise.single_qubit_kind : noise.two_qubit_kind);
        std::vector<ChannelOp> ops;
        if (params.error > 0.0) ops.emplace_back(depolarizing(params.error, n, qubits));
        for (int q : qubits) add_thermal(ops, noise.table.t1(q), noise.table.t2(q), params.time, q);
        gate.steps.push_back({GeneratorExp(PauliSum(n, {term})), std::move(ops)});
    }
    return gate;
}

NoisyGate make_gate(const NoiseSpec& noise, const PauliSum& generator, int gate_index) {
    if (const auto* dev = std::get_if<DeviceNoise>(&noise)) return device_gate(*dev, generator);
    NoisyGate gate{generator, {}};
    gate.steps.push_back({GeneratorExp(generator), layer_noise(noise, generator, gate_index)});
    return gate;
}

std::string decomposition_of(const NoiseSpec& noise) {
    if (std::holds_alternative<DeviceNoise>(noise)) {
        return "elementary: each generator term is its own gate (ZZ edge -> two-qubit gate, X_l -> single-qubit "
               "gate), followed by depolarizing then thermal relaxation on its qubits";
    }
    return "layer: one exponential per parameter, noise on every qubit after it";
}

void check_theta(const ParametricCircuit& circuit, const RVector& theta) {
    if (theta.size() != circuit.nparams()) {
        throw DimensionError("expected " + std::to_string(circuit.nparams()) + " parameters, got " +
                             std::to_string(theta.size()));
    }
}

// Hermiticity repair and trace renormalisation after a gate.
void repair(CMatrix& rho) {
    hermitize(rho);
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-8) throw NumericalError("trace drift " + std::to_string(tr - 1.0) + " after a gate");
    rho /= tr;
}

}  // namespace

std::string describe(const NoiseSpec& noise) {
    std::ostringstream out;
    out.precision(17);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, NoNoise>) {
                out << "none";
            } else if constexpr (std::is_same_v<T, ZDepolarizing>) {
                out << "z-depolarizing eta=" << n.eta;
            } else if constexpr (std::is_same_v<T, GaussianFluctuation>) {
                out << "gaussian-fluctuation sigma=" << n.sigma << " mc_samples=" << n.mc_samples
                    << " seed=" << n.seed;
            } else if constexpr (std::is_same_v<T, ThermalRelaxation>) {
                out << "thermal-relaxation gate_time=" << n.gate_time;
            } else {
                out << "device scale=" << n.table.scale();
            }
        },
        noise);
    return out.str();
}

bool NoisyGate::noiseless() const {
    for (const auto& s : steps) {
        if (!s.noise.empty()) return false;
    }
    return true;
}

ParametricCircuit::ParametricCircuit(int nqubits, std::vector<NoisyGate> gates, PureState initial,
                                     std::string decomposition)
    : nqubits_(nqubits), gates_(std::move(gates)), initial_(std::move(initial)), decomposition_(std::move(decomposition)) {
    check_qubit_cap(nqubits_);
    if (initial_.nqubits() != nqubits_) throw DimensionError("initial state size does not match the circuit");
    for (const auto& g : gates_) {
        if (g.generator.nqubits() != nqubits_) throw DimensionError("gate generator size does not match the circuit");
    }
}

ParametricCircuit ParametricCircuit::from_generators(const std::vector<PauliSum>& generators, const NoiseSpec& noise,
                                                     PureState initial) {
    if (generators.empty()) throw DomainError("circuit needs at least one gate");
    const int n = generators.front().nqubits();
    std::vector<NoisyGate> gates;
    for (std::size_t j = 0; j < generators.size(); ++j) {
        if (generators[j].nqubits() != n) throw DimensionError("generators differ in qubit count");
        gates.push_back(make_gate(noise, generators[j], static_cast<int>(j)));
    }
    return ParametricCircuit(n, std::move(gates), std::move(initial), decomposition_of(noise));
}

std::size_t ParametricCircuit::step_count() const {
    std::size_t count = 0;
    for (const auto& g : gates_) count += g.steps.size();
    return count;
}

bool ParametricCircuit::noiseless() const {
    for (const auto& g : gates_) {
        if (!g.noiseless()) return false;
    }
    return true;
}

ParametricCircuit ParametricCircuit::ideal() const {
    std::vector<NoisyGate> gates;
    gates.reserve(gates_.size());
    for (const auto& g : gates_) {
        NoisyGate clean{g.generator, {}};
        for (const auto& s : g.steps) clean.steps.push_back({s.unitary, {}});
        gates.push_back(std::move(clean));
    }
    return ParametricCircuit(nqubits_, std::move(gates), initial_, decomposition_);
}

PauliSum ising_ring(int nqubits) {
    if (nqubits < 3) throw DomainError("an Ising ring needs at least 3 qubits");
    std::vector<PauliTerm> terms;
    for (int l = 0; l < nqubits; ++l) {
        std::vector<Pauli> axes(static_cast<std::size_t>(nqubits), Pauli::I);
        axes[static_cast<std::size_t>(l)] = Pauli::Z;
        axes[static_cast<std::size_t>((l + 1) % nqubits)] = Pauli::Z;
        terms.push_back({1.0, PauliString(std::move(axes))});
    }
    return PauliSum(nqubits, std::move(terms));
}

PauliSum transverse_mixer(int nqubits) {
    std::vector<PauliTerm> terms;
    for (int l = 0; l < nqubits; ++l) terms.push_back({-1.0, PauliString::single(nqubits, l, Pauli::X)});
    return PauliSum(nqubits, std::move(terms));
}

QaoaSpec QaoaSpec::ring(int nqubits, int layers) {
    QaoaSpec spec;
    spec.nqubits = nqubits;
    spec.layers = layers;
    spec.cost_hamiltonian = ising_ring(nqubits);
    spec.mixer = transverse_mixer(nqubits);
    return spec;
}

ParametricCircuit build_qaoa(const QaoaSpec& spec, const NoiseSpec& noise) {
    if (spec.layers < 1) throw DomainError("QAOA needs at least one layer");
    check_qubit_cap(spec.nqubits);
    if (spec.cost_hamiltonian.nqubits() != spec.nqubits || spec.mixer.nqubits() != spec.nqubits) {
        throw DimensionError("QAOA Hamiltonians do not match the qubit count");
    }
    if (!spec.cost_hamiltonian.is_diagonal()) throw DomainError("QAOA cost Hamiltonian must be diagonal");
    std::vector<PauliSum> generators;
    for (int l = 0; l < spec.layers; ++l) {
        generators.push_back(spec.cost_hamiltonian);
        generators.push_back(spec.mixer);
    }
    return ParametricCircuit::from_generators(generators, noise, plus_state(spec.nqubits));
}

DensityMatrix evolve(const ParametricCircuit& circuit, const RVector& theta) {
    check_theta(circuit, theta);
    CMatrix rho = circuit.initial_state().projector();
    for (int j = 0; j < circuit.nparams(); ++j) {
        for (const auto& step : circuit.gates()[static_cast<std::size_t>(j)].steps) {
            step.unitary.conjugate(rho, theta[j]);
            for (const auto& op : step.noise) rho = nvqo::apply(op, rho);
        }
        repair(rho);
    }
    return DensityMatrix::trusted(std::move(rho));
}

PureState evolve_pure(const ParametricCircuit& circuit, const RVector& theta) {
    check_theta(circuit, theta);
    if (!circuit.noiseless()) throw UnsupportedError("pure-state evolution needs a noiseless circuit");
    CVector v = circuit.initial_state().amplitudes();
    for (int j = 0; j < circuit.nparams(); ++j) {
        for (const auto& step : circuit.gates()[static_cast<std::size_t>(j)].steps) step.unitary.apply(v, theta[j]);
    }
    v.normalize();
    return PureState(std::move(v));
}

EvolvedState evolve_with_derivatives(const ParametricCircuit& circuit, const RVector& theta) {
    check_theta(circuit, theta);
    const auto d = static_cast<Eigen::Index>(circuit.dim());
    const auto p = static_cast<std::size_t>(circuit.nparams());
    CMatrix rho = circuit.initial_state().projector();
    std::vector<CMatrix> deriv(p, CMatrix::Zero(d, d));
    for (std::size_t j = 0; j < p; ++j) {
        const double t = theta[static_cast<Eigen::Index>(j)];
        for (const auto& step : circuit.gates()[j].steps) {
            step.unitary.conjugate(rho, t);
            for (std::size_t k = 0; k <= j; ++k) step.unitary.conjugate(deriv[k], t);
            deriv[j] += commutator_minus_i(step.unitary.generator(), rho);
            for (const auto& op : step.noise) {
                rho = nvqo::apply(op, rho);
                for (std::size_t k = 0; k <= j; ++k) deriv[k] = nvqo::apply(op, deriv[k]);
            }
        }
        repair(rho);
        for (std::size_t k = 0; k <= j; ++k) hermitize(deriv[k]);
    }
    return {DensityMatrix::trusted(std::move(rho)), std::move(deriv)};
}

double cost(const ParametricCircuit& circuit, const PauliSum& h, const RVector& theta) {
    return expectation(evolve(circuit, theta), h);
}

CostAndGradient cost_gradient(const ParametricCircuit& circuit, const PauliSum& h, const RVector& theta) {
    check_theta(circuit, theta);
    if (h.nqubits() != circuit.nqubits()) throw DimensionError("observable size does not match the circuit");
    struct Saved {
        std::size_t gate;
        const GateStep* step;
        CMatrix after_unitary;
    };
    std::vector<Saved> saved;
    saved.reserve(circuit.step_count());
    CMatrix rho = circuit.initial_state().projector();
    for (std::size_t j = 0; j < static_cast<std::size_t>(circuit.nparams()); ++j) {
        for (const auto& step : circuit.gates()[j].steps) {
            step.unitary.conjugate(rho, theta[static_cast<Eigen::Index>(j)]);
            saved.push_back({j, &step, rho});
            for (const auto& op : step.noise) rho = nvqo::apply(op, rho);
        }
        repair(rho);
    }
    CostAndGradient out{expectation(rho, h), RVector::Zero(circuit.nparams())};
    CMatrix o = h.realize();
    for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        const GateStep& step = *it->step;
        for (auto op = step.noise.rbegin(); op != step.noise.rend(); ++op) o = apply_adjoint(*op, o);
        const CMatrix d_rho = commutator_minus_i(step.unitary.generator(), it->after_unitary);
        out.gradient[static_cast<Eigen::Index>(it->gate)] += trace_product(d_rho, o).real();
        step.unitary.conjugate(o, -theta[static_cast<Eigen::Index>(it->gate)]);
    }
    return out;
}

}  // namespace nvqo
