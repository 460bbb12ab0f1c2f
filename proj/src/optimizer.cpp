#include "nvqo/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "nvqo/error.hpp"
#include "nvqo/rng.hpp"

namespace nvqo {

double LearningRate::value(int iterations) const {
    if (mode == Mode::Constant) return alpha;
    return radius / (g * std::sqrt(static_cast<double>(iterations)));
}

void OptimizerConfig::validate() const {
    if (iterations < 1) throw ConfigError("optimizer: iterations must be >= 1");
    if (batch < 1) throw ConfigError("optimizer: batch must be >= 1");
    if (shots < 0 || cost_shots < 0) throw ConfigError("optimizer: shots must be >= 0");
    if (learning_rate.mode == LearningRate::Mode::Constant) {
        if (!(learning_rate.alpha > 0.0)) throw ConfigError("optimizer: learning rate must be positive");
    } else if (!(learning_rate.radius > 0.0) || !(learning_rate.g > 0.0)) {
        throw ConfigError("optimizer: schedule needs R > 0 and G > 0");
    }
    if (!(init_half_width >= 0.0)) throw ConfigError("optimizer: init_half_width must be >= 0");
}

std::string OptimizerConfig::echo() const {
    std::ostringstream out;
    out.precision(17);
    out << "iterations=" << iterations << " batch=" << batch << " estimator=" << to_string(estimator)
        << " lambda=" << to_string(lambda) << " shots=" << shots << " cost_shots=" << cost_shots << " seed=" << seed;
    if (learning_rate.mode == LearningRate::Mode::Constant) {
        out << " alpha=" << learning_rate.alpha;
    } else {
        out << " schedule R=" << learning_rate.radius << " G=" << learning_rate.g;
    }
    out << " init=" << (init == InitPolicy::Zero ? "zero" : "uniform") << " init_half_width=" << init_half_width
        << " init_seed=" << init_seed;
    return out.str();
}

RVector initial_parameters(const OptimizerConfig& config, int nparams) {
    RVector theta = RVector::Zero(nparams);
    if (config.init == InitPolicy::UniformSmall) {
        Rng rng(config.init_seed);
        for (int j = 0; j < nparams; ++j) theta[j] = config.init_half_width * (2.0 * rng.uniform() - 1.0);
    }
    return theta;
}

std::string RunTrace::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "iter,cost_sampled,grad_norm_sampled";
    const auto p = records.empty() ? 0 : records.front().theta.size();
    for (Eigen::Index j = 0; j < p; ++j) out << ",theta_" << (j + 1);
    out << '\n';
    for (const auto& r : records) {
        out << r.iter << ',' << r.cost_sampled << ',' << r.grad_norm_sampled;
        for (Eigen::Index j = 0; j < p; ++j) out << ',' << r.theta[j];
        out << '\n';
    }
    return out.str();
}

RunTrace sgd_run(const ParametricCircuit& circuit, const PauliSum& h, const OptimizerConfig& config) {
    return sgd_run(circuit, h, config, initial_parameters(config, circuit.nparams()));
}

RunTrace sgd_run(const ParametricCircuit& circuit, const PauliSum& h, const OptimizerConfig& config,
                 const RVector& theta0) {
    config.validate();
    if (config.estimator == EstimatorKind::Hadamard && !circuit.noiseless()) {
        throw UnsupportedError("the Hadamard-test estimator needs a noiseless circuit");
    }
    if (theta0.size() != circuit.nparams()) throw DimensionError("initial parameters have the wrong length");
    const double alpha = config.learning_rate.value(config.iterations);
    const MeasurementBasis basis(h);
    const int batch = config.shots == 0 ? 1 : config.batch;

    RunTrace trace;
    trace.seed = config.seed;
    trace.config_echo = config.echo();
    trace.records.reserve(static_cast<std::size_t>(config.iterations));
    RVector theta = theta0;
    RVector sum = RVector::Zero(theta.size());
    for (int i = 1; i <= config.iterations; ++i) {
        const auto step = static_cast<std::uint64_t>(i);
        IterationRecord rec;
        rec.iter = i;
        rec.theta = theta;
        const DensityMatrix rho = evolve(circuit, theta);
        rec.cost_sampled = sample_cost(rho, basis, config.cost_shots, derive_seed(config.seed, 2 * step));
        rec.cost_exact = config.record_exact_cost ? basis.energies().dot(basis.diagonal_of(rho.matrix()))
                                                  : std::numeric_limits<double>::quiet_NaN();
        RVector g = RVector::Zero(theta.size());
        const std::uint64_t grad_seed = derive_seed(config.seed, 2 * step + 1);
        for (int m = 0; m < batch; ++m) {
            g += sample_gradient(config.estimator, circuit, theta, h, config.shots, config.lambda,
                                 derive_seed(grad_seed, static_cast<std::uint64_t>(m)))
                     .values;
        }
        g /= batch;
        rec.grad_norm_sampled = g.norm();
        sum += theta;
        trace.records.push_back(std::move(rec));

        theta -= alpha * g;
        if (!theta.allFinite() || theta.norm() > 1e3) {
            throw NumericalError("divergence guard: |theta| = " + std::to_string(theta.norm()) + " at iteration " +
                                 std::to_string(i) + " (learning rate " + std::to_string(alpha) + ")");
        }
    }
    trace.theta_average = sum / config.iterations;
    trace.final_exact_cost = cost(circuit, h, trace.theta_average);
    return trace;
}

double averaged_accuracy(const RunTrace& trace, double exact_opt_cost) { return trace.final_exact_cost - exact_opt_cost; }

std::vector<IterationSummary> summarize(const std::vector<std::vector<double>>& per_trial) {
    std::vector<IterationSummary> out;
    if (per_trial.empty()) return out;
    const std::size_t n = per_trial.front().size();
    const double t = static_cast<double>(per_trial.size());
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (const auto& s : per_trial) mean += s.at(i);
        mean /= t;
        double var = 0.0;
        for (const auto& s : per_trial) var += (s[i] - mean) * (s[i] - mean);
        const double stderr_ = per_trial.size() > 1 ? std::sqrt(var / (t - 1.0) / t) : 0.0;
        out.push_back({static_cast<int>(i + 1), mean, mean - 1.96 * stderr_, mean + 1.96 * stderr_});
    }
    return out;
}

MultiTrialResult multi_trial(const ParametricCircuit& circuit, const PauliSum& h, const OptimizerConfig& config,
                             int trials) {
    if (trials < 1) throw DomainError("multi_trial: trials must be >= 1");
    const RVector theta0 = initial_parameters(config, circuit.nparams());
    MultiTrialResult out;
    std::vector<std::vector<double>> sampled, exact;
    for (int t = 0; t < trials; ++t) {
        OptimizerConfig c = config;
        c.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
        out.traces.push_back(sgd_run(circuit, h, c, theta0));
        std::vector<double> s, e;
        for (const auto& r : out.traces.back().records) {
            s.push_back(r.cost_sampled);
            e.push_back(r.cost_exact);
        }
        sampled.push_back(std::move(s));
        exact.push_back(std::move(e));
    }
    out.sampled = summarize(sampled);
    if (config.record_exact_cost) out.exact = summarize(exact);
    return out;
}

namespace {

ExactMinimum lbfgs(const ParametricCircuit& circuit, const PauliSum& h, const ExactMinimizerConfig& config,
                   RVector x) {
    auto eval = cost_gradient(circuit, h, x);
    double f = eval.cost;
    RVector g = eval.gradient;
    std::deque<std::pair<RVector, RVector>> memory;  // (s, y)
    int it = 0;
    for (; it < config.max_iterations; ++it) {
        if (g.cwiseAbs().maxCoeff() < config.gradient_tolerance) break;
        // two-loop recursion
        RVector q = g;
        std::vector<double> a(memory.size());
        for (std::size_t m = memory.size(); m-- > 0;) {
            const auto& [s, y] = memory[m];
            a[m] = s.dot(q) / y.dot(s);
            q -= a[m] * y;
        }
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            q *= s.dot(y) / y.dot(y);
        } else {
            q *= std::min(1.0, 1.0 / g.norm());
        }
        for (std::size_t m = 0; m < memory.size(); ++m) {
            const auto& [s, y] = memory[m];
            const double b = y.dot(q) / y.dot(s);
            q += s * (a[m] - b);
        }
        RVector dir = -q;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            memory.clear();
            dir = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0;
        bool accepted = false;
        CostAndGradient next{};
        RVector xn;
        for (int ls = 0; ls < 40; ++ls) {
            xn = x + step * dir;
            next = cost_gradient(circuit, h, xn);
            if (next.cost <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const RVector s = xn - x;
        const RVector y = next.gradient - g;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            memory.emplace_back(s, y);
            if (static_cast<int>(memory.size()) > config.memory) memory.pop_front();
        }
        const double improvement = f - next.cost;
        x = xn;
        f = next.cost;
        g = next.gradient;
        if (improvement < 1e-15 * std::max(1.0, std::abs(f))) break;
    }
    return {x, f, it};
}

}  // namespace

ExactMinimum minimize_exact(const ParametricCircuit& circuit, const PauliSum& h, const ExactMinimizerConfig& config,
                            const std::vector<RVector>& starts) {
    std::vector<RVector> points = starts;
    Rng rng(config.seed);
    for (int r = 0; r < config.restarts; ++r) {
        RVector x(circuit.nparams());
        for (int j = 0; j < circuit.nparams(); ++j) x[j] = config.init_half_width * (2.0 * rng.uniform() - 1.0);
        points.push_back(std::move(x));
    }
    if (points.empty()) throw DomainError("minimize_exact: no starting points");
    ExactMinimum best;
    best.cost = std::numeric_limits<double>::infinity();
    for (const auto& x0 : points) {
        if (x0.size() != circuit.nparams()) throw DimensionError("minimize_exact: start has the wrong length");
        ExactMinimum m = lbfgs(circuit, h, config, x0);
        if (m.cost < best.cost) best = std::move(m);
    }
    return best;
}

}  // namespace nvqo
