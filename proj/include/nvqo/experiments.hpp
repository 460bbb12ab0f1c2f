#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvqo/ansatz.hpp"
#include "nvqo/bounds.hpp"
#include "nvqo/optimizer.hpp"

namespace nvqo {

/// Where and how an experiment writes its outputs.
struct RunContext {
    std::uint64_t seed = 1;
    std::string out_dir;  // empty: compute only, write nothing
    bool full = false;
    nlohmann::json config = nlohmann::json::object();
};

/// Noise block of a config: {"model": "none" | "z-depolarizing" | "gaussian-fluctuation"
/// | "thermal" | "device", ...}.
NoiseSpec parse_noise(const nlohmann::json& block);

// ---- qfi-scan ----------------------------------------------------------------

struct QfiScanConfig {
    int nqubits = 6;
    int layers = 10;
    std::vector<double> etas{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
    int probes = 64;
    LambdaPolicy lambda;
    ExactMinimizerConfig ideal_minimizer{8, 400, 1e-8, 10, 11, kPi};
    ExactMinimizerConfig noisy_minimizer{2, 400, 1e-8, 10, 13, kPi};
    int enumeration_qubit_cap = 10;
    double radius = 0.0;  // 0: pi sqrt(P)
};
QfiScanConfig parse_qfi_scan(const nlohmann::json& config);

struct QfiScanRow {
    double eta = 0.0;
    double g2_sqrt_ld = 0.0;
    double g2_sqrt_sld = 0.0;
    double qfi_bound = 0.0;
    double err_opt = 0.0;
    double noisy_opt_cost = 0.0;
    BoundReport report;
};

struct QfiScanResult {
    double ideal_opt_cost = 0.0;
    double ground_energy = 0.0;
    std::vector<QfiScanRow> rows;
};
QfiScanResult run_qfi_scan(const QfiScanConfig& config, const RunContext& ctx);

// ---- landscape ---------------------------------------------------------------

struct LandscapeConfig {
    int nqubits = 6;
    int layers = 1;
    int points = 41;
    double gamma_min = -kPi / 4, gamma_max = kPi / 4;
    double beta_min = -kPi / 2, beta_max = kPi / 2;
    nlohmann::json noise = {{"model", "z-depolarizing"}, {"eta", 0.1}};
};
LandscapeConfig parse_landscape(const nlohmann::json& config);

struct LandscapePoint {
    double gamma1, beta1, cost, variance;
};
struct LandscapeResult {
    std::vector<LandscapePoint> noiseless;
    std::vector<LandscapePoint> noisy;
};
LandscapeResult run_landscape(const LandscapeConfig& config, const RunContext& ctx);

// ---- convergence ------------------------------------------------------------

/// LD estimator, alpha = 0.01, 200 iterations, 200 shots, uniform start in
/// [-pi/8, pi/8], exact cost recorded.
OptimizerConfig default_convergence_optimizer();

struct ConvergenceConfig {
    int nqubits = 6;
    int layers = 3;
    std::vector<double> scales{2.0, 4.0, 10.0};
    int trials = 10;
    OptimizerConfig optimizer = default_convergence_optimizer();
    // Per-arm alpha = R / (G sqrt(I)), G from the QFI bound over the
    // starting point plus `schedule_probes` Halton points.
    bool schedule = false;
    int schedule_probes = 16;
    nlohmann::json noise_table = nlohmann::json::object();  // inline table or {"path": ...}
};
ConvergenceConfig parse_convergence(const nlohmann::json& config, bool full);

struct ConvergenceArm {
    std::string name;
    double scale = 0.0;  // 0 for the noiseless arm
    MultiTrialResult result;
};
struct ConvergenceResult {
    std::vector<ConvergenceArm> arms;  // arms[0] is noiseless
};
ConvergenceResult run_convergence(const ConvergenceConfig& config, const RunContext& ctx);

/// Mean over the last 10% of a curve.
double final_level(const std::vector<double>& curve);
/// First iteration (1-based) after which the curve stays within 5% of
/// |start - final| of its final level.
int iterations_to_converge(const std::vector<double>& curve, double fraction = 0.05);

// ---- bounds-audit ----------------------------------------------------------

struct BoundsAuditConfig {
    int instances = 100;
    int max_qubits = 4;
    double max_eta = 0.4;
    double perturbation = 0.3;  // |vartheta - theta| scale on half of the instances
    std::vector<int> depths{2, 4, 6, 8};
    int depth_qubits = 3;
    double depth_eta = 0.05;
};
BoundsAuditConfig parse_bounds_audit(const nlohmann::json& config);

struct AuditCheck {
    std::string name;
    int instance = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack() const { return rhs - lhs; }
    bool pass = false;
};
struct BoundsAuditResult {
    std::vector<AuditCheck> checks;
    bool all_pass() const;
};
BoundsAuditResult run_bounds_audit(const BoundsAuditConfig& config, const RunContext& ctx);

// ---- channel-validate -------------------------------------------------------

struct ChannelValidateConfig {
    std::vector<double> sigmas{0.0, 0.1, 0.3, 0.6, 1.0};
    int mc_samples = 10000;
    int quadrature_points = 2001;
};
ChannelValidateConfig parse_channel_validate(const nlohmann::json& config);

BoundsAuditResult run_channel_validate(const ChannelValidateConfig& config, const RunContext& ctx);

/// Gaussian-averaged conjugation of an involutory generator, integrated with
/// composite Simpson over [-8 sigma, 8 sigma]; returns the Choi matrix.
CMatrix gaussian_average_choi_simpson(const PauliSum& generator, double sigma, int points);

// ---- outputs -----------------------------------------------------------------

std::string version_string();

/// Writes <out_dir>/<name>.manifest.json with seed, config echo, version,
/// kernel backend and the given extra fields.
void write_manifest(const RunContext& ctx, const std::string& name, const nlohmann::json& extra);

}  // namespace nvqo
