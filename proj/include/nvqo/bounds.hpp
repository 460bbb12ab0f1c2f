#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nvqo/ansatz.hpp"
#include "nvqo/estimators.hpp"

namespace nvqo {

/// C_noisy(vartheta) - C(theta), signed.
double err(const ParametricCircuit& noisy, const RVector& vartheta, const ParametricCircuit& ideal,
           const RVector& theta, const PauliSum& h);

enum class PeelingMode {
    Auto,    // Direct up to 4 qubits, Local above
    Direct,  // Choi matrix of each full noisy gate against the ideal gate
    Local,   // triangle inequality over steps: local noise Choi bounds + unitary drift
};

struct PeelingBound {
    std::vector<double> per_gate;  // Choi upper bounds on ||E_k - U_k||_diamond
    double sum_form = 0.0;         // ||H|| * sum_k
    double max_form = 0.0;         // ||H|| * P * max_k
};

PeelingBound peeling_upper(const ParametricCircuit& noisy, const RVector& vartheta, const ParametricCircuit& ideal,
                           const RVector& theta, const PauliSum& h, PeelingMode mode = PeelingMode::Auto);

/// 2 ||H|| sqrt(1 - <psi|rho|psi>)
double fidelity_upper(const PureState& psi, const DensityMatrix& rho, const PauliSum& h);

/// `count` Halton points in [0, 2 pi)^P, shifted by a seeded random offset.
std::vector<RVector> halton_probes(int nparams, int count, std::uint64_t seed);

/// Exact per-probe quantities shared by the empirical and QFI-based G estimates.
struct ProbeStatistics {
    RVector qfi;
    RVector sld_second_moment;
    RVector ld_second_moment;
};
ProbeStatistics probe_statistics(const ParametricCircuit& circuit, const RVector& theta, const PauliSum& h,
                                 const LambdaPolicy& policy);

struct G2Empirical {
    double second_moment = 0.0;  // max over probes of E[||g||^2]
    std::size_t argmax = 0;
    bool sampled_fallback = false;
    double root() const;
};

/// Exact enumeration up to `enumeration_qubit_cap` qubits; above it each
/// component distribution is sampled 10^5 times and the flag is set.
G2Empirical g2_empirical(const ParametricCircuit& circuit, const std::vector<RVector>& probes, EstimatorKind kind,
                         const LambdaPolicy& policy, const PauliSum& h, int enumeration_qubit_cap = 10,
                         std::uint64_t seed = 0);

struct G2QfiUpper {
    double max_qfi = 0.0;
    double bound = 0.0;  // sqrt(P) ||H|| sqrt(max_qfi)
};
G2QfiUpper g2_qfi_upper(const ParametricCircuit& circuit, const std::vector<RVector>& probes, const PauliSum& h);

/// pi sqrt(P)
double default_radius(int nparams);

struct BoundReport {
    double err = 0.0;
    double err_peeling_upper = 0.0;
    double err_peeling_upper_max_form = 0.0;
    double err_fidelity_upper = 0.0;
    double g2_empirical = 0.0;  // squared: max E[||g||^2]
    double g2_qfi_upper = 0.0;  // squared: P ||H||^2 max QFI
    bool g2_fallback = false;
    double radius = 0.0;
    std::size_t probe_set_size = 0;
    std::uint64_t seed = 0;
    std::string estimator;

    bool err_negative() const { return err < 0.0; }
    double g_empirical() const;
    double g_qfi_upper() const;
    double assembled_rhs(double iterations) const;
    /// I where R G / sqrt(I) = Err; infinity when Err <= 0.
    double crossover_iterations() const;

    std::vector<std::pair<std::string, std::string>> to_record() const;
    std::string to_text() const;
};

/// Err + R sqrt(g2_qfi_upper) / sqrt(I)
double assembled_bound(const BoundReport& report, double radius, double iterations);

}  // namespace nvqo
