#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nvqo/channels.hpp"
#include "nvqo/noise_table.hpp"
#include "nvqo/pauli.hpp"
#include "nvqo/state.hpp"
#include "nvqo/unitary.hpp"

namespace nvqo {

// ---- noise selection -------------------------------------------------------

struct NoNoise {};

/// {sqrt(1-eta) I, sqrt(eta) Z} on every qubit after each gate.
struct ZDepolarizing {
    double eta = 0.0;
};

/// Gate angle jittered by Normal(0, sigma^2). Exact for involutory generators;
/// other generators need mc_samples > 0 and use a seeded sample average.
struct GaussianFluctuation {
    double sigma = 0.0;
    int mc_samples = 0;
    std::uint64_t seed = 0;
};

/// Amplitude and phase damping on every qubit after each gate. A single T1/T2
/// entry is broadcast to all qubits.
struct ThermalRelaxation {
    std::vector<double> t1;
    std::vector<double> t2;
    double gate_time = 0.0;
};

/// Device model: generators are split into single- and two-qubit gates, each
/// followed by depolarizing noise and thermal relaxation.
struct DeviceNoise {
    NoiseTable table;
    std::string single_qubit_kind = "single-qubit";
    std::string two_qubit_kind = "two-qubit";
};

using NoiseSpec = std::variant<NoNoise, ZDepolarizing, GaussianFluctuation, ThermalRelaxation, DeviceNoise>;

std::string describe(const NoiseSpec& noise);

// ---- circuits --------------------------------------------------------------

/// One exponential exp(-i theta G) followed by noise. A gate is a sequence of
/// steps with commuting generators that sum to the gate generator.
struct GateStep {
    GeneratorExp unitary;
    std::vector<ChannelOp> noise;
};

struct NoisyGate {
    PauliSum generator;
    std::vector<GateStep> steps;

    bool noiseless() const;
};

class ParametricCircuit {
  public:
    ParametricCircuit(int nqubits, std::vector<NoisyGate> gates, PureState initial, std::string decomposition);

    /// Generic ansatz exp(-i theta_P X_P) ... exp(-i theta_1 X_1) |psi0>, with
    /// the same noise selection after every gate.
    static ParametricCircuit from_generators(const std::vector<PauliSum>& generators, const NoiseSpec& noise,
                                             PureState initial);

    int nqubits() const { return nqubits_; }
    std::size_t dim() const { return dim_of(nqubits_); }
    int nparams() const { return static_cast<int>(gates_.size()); }
    const std::vector<NoisyGate>& gates() const { return gates_; }
    const PureState& initial_state() const { return initial_; }
    const std::string& decomposition() const { return decomposition_; }
    std::size_t step_count() const;

    bool noiseless() const;
    /// Same generators, all noise removed.
    ParametricCircuit ideal() const;

  private:
    int nqubits_;
    std::vector<NoisyGate> gates_;
    PureState initial_;
    std::string decomposition_;
};

/// sum_l Z_l Z_{l+1} with Z_{N+1} = Z_1.
PauliSum ising_ring(int nqubits);
/// -sum_l X_l
PauliSum transverse_mixer(int nqubits);

struct QaoaSpec {
    int nqubits = 0;
    int layers = 0;
    PauliSum cost_hamiltonian{1};
    PauliSum mixer{1};

    static QaoaSpec ring(int nqubits, int layers);
    int nparams() const { return 2 * layers; }
};

/// Gates [gamma_1, beta_1, ..., gamma_p, beta_p] acting on |+>^N.
ParametricCircuit build_qaoa(const QaoaSpec& spec, const NoiseSpec& noise);

// ---- evolution -------------------------------------------------------------

DensityMatrix evolve(const ParametricCircuit& circuit, const RVector& theta);

/// Noiseless state vector; throws UnsupportedError for noisy circuits.
PureState evolve_pure(const ParametricCircuit& circuit, const RVector& theta);

struct EvolvedState {
    DensityMatrix rho;
    std::vector<CMatrix> derivatives;  // d rho / d theta_j
};

EvolvedState evolve_with_derivatives(const ParametricCircuit& circuit, const RVector& theta);

/// Tr[rho(theta) H]
double cost(const ParametricCircuit& circuit, const PauliSum& h, const RVector& theta);

/// Exact gradient of Tr[rho(theta) H] by reverse-mode propagation of H.
struct CostAndGradient {
    double cost;
    RVector gradient;
};
CostAndGradient cost_gradient(const ParametricCircuit& circuit, const PauliSum& h, const RVector& theta);

}  // namespace nvqo
