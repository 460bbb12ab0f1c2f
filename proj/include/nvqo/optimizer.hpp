#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nvqo/ansatz.hpp"
#include "nvqo/estimators.hpp"

namespace nvqo {

struct LearningRate {
    enum class Mode { Constant, Schedule };
    Mode mode = Mode::Constant;
    double alpha = 0.05;
    double radius = 0.0;  // R, schedule mode
    double g = 0.0;       // G, schedule mode

    static LearningRate constant(double a) { return {Mode::Constant, a, 0.0, 0.0}; }
    /// alpha = R / (G sqrt(I))
    static LearningRate schedule(double r, double g) { return {Mode::Schedule, 0.0, r, g}; }
    double value(int iterations) const;
};

enum class InitPolicy { Zero, UniformSmall };

struct OptimizerConfig {
    int iterations = 100;
    LearningRate learning_rate;
    int batch = 1;
    EstimatorKind estimator = EstimatorKind::SLD;
    LambdaPolicy lambda;
    int shots = 200;       // per gradient estimate, 0 = exact gradient
    int cost_shots = 200;  // per recorded cost estimate, 0 = exact cost
    std::uint64_t seed = 1;
    InitPolicy init = InitPolicy::Zero;
    double init_half_width = kPi / 8.0;
    std::uint64_t init_seed = 7;
    bool record_exact_cost = false;

    void validate() const;
    std::string echo() const;
};

/// Starting point for a run: zero, or uniform in [-w, w] from init_seed.
RVector initial_parameters(const OptimizerConfig& config, int nparams);

struct IterationRecord {
    int iter = 0;  // 1-based
    RVector theta;
    double cost_sampled = 0.0;
    double grad_norm_sampled = 0.0;
    double cost_exact = 0.0;  // NaN unless record_exact_cost
};

struct RunTrace {
    std::vector<IterationRecord> records;
    RVector theta_average;  // (1/I) sum_i theta^(i)
    double final_exact_cost = 0.0;
    std::uint64_t seed = 0;
    std::string config_echo;

    /// iter, cost_sampled, grad_norm_sampled, theta_1..theta_P
    std::string to_csv() const;
};

RunTrace sgd_run(const ParametricCircuit& circuit, const PauliSum& h, const OptimizerConfig& config);
RunTrace sgd_run(const ParametricCircuit& circuit, const PauliSum& h, const OptimizerConfig& config,
                 const RVector& theta0);

/// C_noisy(theta^[1:I]) - exact_opt_cost
double averaged_accuracy(const RunTrace& trace, double exact_opt_cost);

struct IterationSummary {
    int iter = 0;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Per-iteration mean and mean +- 1.96 stderr of a per-trial series.
std::vector<IterationSummary> summarize(const std::vector<std::vector<double>>& per_trial);

struct MultiTrialResult {
    std::vector<RunTrace> traces;
    std::vector<IterationSummary> sampled;  // of cost_sampled
    std::vector<IterationSummary> exact;    // of cost_exact, empty unless recorded
};

/// Trial t runs with seed derive_seed(config.seed, t); all trials share the initial point.
MultiTrialResult multi_trial(const ParametricCircuit& circuit, const PauliSum& h, const OptimizerConfig& config,
                             int trials);

// ---- deterministic minimisation of the exact cost -------------------------

struct ExactMinimizerConfig {
    int restarts = 8;
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
    int memory = 10;
    std::uint64_t seed = 11;
    double init_half_width = kPi;
};

struct ExactMinimum {
    RVector theta;
    double cost = 0.0;
    int iterations = 0;
};

/// L-BFGS with Armijo backtracking from `starts` plus `restarts` random points;
/// returns the best local minimum found.
ExactMinimum minimize_exact(const ParametricCircuit& circuit, const PauliSum& h, const ExactMinimizerConfig& config,
                            const std::vector<RVector>& starts = {});

}  // namespace nvqo
