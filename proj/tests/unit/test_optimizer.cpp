#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "nvqo/error.hpp"
#include "nvqo/optimizer.hpp"

using namespace nvqo;

namespace {

OptimizerConfig exact_config(int iterations, double alpha) {
    OptimizerConfig c;
    c.iterations = iterations;
    c.learning_rate = LearningRate::constant(alpha);
    c.shots = 0;
    c.cost_shots = 0;
    return c;
}

}  // namespace

TEST(LearningRate, ConstantAndSchedule) {
    EXPECT_EQ(LearningRate::constant(0.1).value(400), 0.1);
    EXPECT_NEAR(LearningRate::schedule(2.0, 4.0).value(100), 2.0 / (4.0 * 10.0), 1e-15);
}

TEST(OptimizerConfig, Validation) {
    OptimizerConfig c;
    EXPECT_NO_THROW(c.validate());
    c.iterations = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = OptimizerConfig{};
    c.batch = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = OptimizerConfig{};
    c.learning_rate = LearningRate::constant(0.0);
    EXPECT_THROW(c.validate(), ConfigError);
    c.learning_rate = LearningRate::schedule(1.0, 0.0);
    EXPECT_THROW(c.validate(), ConfigError);
    c.learning_rate = LearningRate::schedule(1.0, 2.0);
    EXPECT_NO_THROW(c.validate());
}

TEST(InitialParameters, Policies) {
    OptimizerConfig c;
    EXPECT_EQ(initial_parameters(c, 5).cwiseAbs().maxCoeff(), 0.0);
    c.init = InitPolicy::UniformSmall;
    const RVector a = initial_parameters(c, 6);
    EXPECT_LE(a.cwiseAbs().maxCoeff(), kPi / 8);
    EXPECT_GT(a.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((a - initial_parameters(c, 6)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sgd, TraceInvariants) {
    const auto c = fixture::noisy_ring(3, 1, 0.1);
    OptimizerConfig cfg;
    cfg.iterations = 25;
    cfg.learning_rate = LearningRate::constant(0.05);
    cfg.init = InitPolicy::UniformSmall;
    cfg.record_exact_cost = true;
    const RunTrace t = sgd_run(c, ising_ring(3), cfg);
    ASSERT_EQ(t.records.size(), 25u);
    RVector sum = RVector::Zero(2);
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        EXPECT_EQ(t.records[i].iter, static_cast<int>(i + 1));
        EXPECT_FALSE(std::isnan(t.records[i].cost_exact));
        sum += t.records[i].theta;
    }
    EXPECT_LE((sum / 25.0 - t.theta_average).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(t.final_exact_cost, cost(c, ising_ring(3), t.theta_average), 1e-14);
    EXPECT_NEAR(averaged_accuracy(t, -3.0), t.final_exact_cost + 3.0, 1e-15);
    EXPECT_FALSE(t.config_echo.empty());
}

TEST(Sgd, Deterministic) {
    const auto c = fixture::noisy_ring(3, 2, 0.05);
    OptimizerConfig cfg;
    cfg.iterations = 10;
    cfg.init = InitPolicy::UniformSmall;
    cfg.seed = 99;
    const RunTrace a = sgd_run(c, ising_ring(3), cfg);
    const RunTrace b = sgd_run(c, ising_ring(3), cfg);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ((a.records[i].theta - b.records[i].theta).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(a.records[i].cost_sampled, b.records[i].cost_sampled);
    }
    cfg.seed = 100;
    const RunTrace d = sgd_run(c, ising_ring(3), cfg);
    EXPECT_GT((a.theta_average - d.theta_average).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sgd, ExactModeIsGradientDescent) {
    const auto c = build_qaoa(QaoaSpec::ring(3, 1), NoNoise{});
    const PauliSum h = ising_ring(3);
    RVector theta(2);
    theta << 0.2, -0.3;
    const RunTrace t = sgd_run(c, h, exact_config(5, 0.05), theta);
    RVector x = theta;
    for (const auto& r : t.records) {
        EXPECT_LE((r.theta - x).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_NEAR(r.cost_sampled, cost(c, h, x), 1e-12);
        x -= 0.05 * cost_gradient(c, h, x).gradient;
    }
}

TEST(Sgd, SaddleAtZeroIsFixed) {
    const auto c = build_qaoa(QaoaSpec::ring(4, 2), NoNoise{});
    const RunTrace t = sgd_run(c, ising_ring(4), exact_config(20, 0.05));
    for (const auto& r : t.records) EXPECT_EQ(r.theta.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sgd, ExactDescentIsMonotone) {
    const auto c = build_qaoa(QaoaSpec::ring(4, 2), NoNoise{});
    OptimizerConfig cfg = exact_config(300, 0.02);
    cfg.init = InitPolicy::UniformSmall;
    cfg.init_half_width = kPi;
    for (std::uint64_t s : {1u, 2u, 3u}) {
        cfg.init_seed = s;
        const RunTrace t = sgd_run(c, ising_ring(4), cfg);
        for (std::size_t i = 1; i < t.records.size(); ++i) {
            EXPECT_LE(t.records[i].cost_sampled, t.records[i - 1].cost_sampled + 1e-10) << "seed " << s;
        }
    }
}

TEST(Sgd, HadamardNeedsNoiselessCircuit) {
    OptimizerConfig cfg;
    cfg.estimator = EstimatorKind::Hadamard;
    EXPECT_THROW(sgd_run(fixture::noisy_ring(3, 1, 0.1), ising_ring(3), cfg), UnsupportedError);
    cfg.iterations = 3;
    EXPECT_NO_THROW(sgd_run(build_qaoa(QaoaSpec::ring(3, 1), NoNoise{}), ising_ring(3), cfg));
}

TEST(Sgd, DivergenceGuard) {
    const auto c = build_qaoa(QaoaSpec::ring(3, 1), NoNoise{});
    RVector theta(2);
    theta << 0.4, 0.3;
    EXPECT_THROW(sgd_run(c, ising_ring(3), exact_config(10, 1e5), theta), NumericalError);
}

TEST(Sgd, MiniBatchReducesVariance) {
    const auto c = fixture::noisy_ring(3, 1, 0.1);
    const PauliSum h = ising_ring(3);
    RVector theta(2);
    theta << 0.4, 0.3;
    auto step_variance = [&](int batch) {
        OptimizerConfig cfg;
        cfg.iterations = 2;
        cfg.shots = 1;
        cfg.cost_shots = 1;
        cfg.batch = batch;
        cfg.learning_rate = LearningRate::constant(1.0);
        double s = 0.0, s2 = 0.0;
        const int repeats = 1000;
        for (int r = 0; r < repeats; ++r) {
            cfg.seed = static_cast<std::uint64_t>(r + 1);
            const double x = sgd_run(c, h, cfg, theta).records[1].theta[0];
            s += x;
            s2 += x * x;
        }
        return (s2 - s * s / repeats) / (repeats - 1);
    };
    const double ratio = step_variance(1) / step_variance(4);
    EXPECT_GT(ratio, 3.2);
    EXPECT_LT(ratio, 5.0);
}

TEST(Sgd, CsvColumns) {
    const auto c = build_qaoa(QaoaSpec::ring(3, 1), NoNoise{});
    const RunTrace t = sgd_run(c, ising_ring(3), exact_config(3, 0.05));
    std::istringstream in(t.to_csv());
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "iter,cost_sampled,grad_norm_sampled,theta_1,theta_2");
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 3);
}

TEST(Summarize, MeanAndInterval) {
    const auto s = summarize({{1.0, 2.0}, {3.0, 2.0}, {5.0, 2.0}});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_DOUBLE_EQ(s[0].mean, 3.0);
    EXPECT_NEAR(s[0].ci_high - s[0].mean, 1.96 * 2.0 / std::sqrt(3.0), 1e-12);
    EXPECT_EQ(s[1].ci_low, 2.0);
    EXPECT_EQ(s[1].ci_high, 2.0);
    EXPECT_TRUE(summarize({}).empty());
}

TEST(MultiTrial, SeedsAndSummaries) {
    const auto c = fixture::noisy_ring(3, 1, 0.1);
    OptimizerConfig cfg;
    cfg.iterations = 8;
    cfg.init = InitPolicy::UniformSmall;
    cfg.record_exact_cost = true;
    const auto r = multi_trial(c, ising_ring(3), cfg, 4);
    ASSERT_EQ(r.traces.size(), 4u);
    ASSERT_EQ(r.sampled.size(), 8u);
    ASSERT_EQ(r.exact.size(), 8u);
    for (std::size_t t = 0; t < 4; ++t) {
        EXPECT_EQ(r.traces[t].seed, derive_seed(cfg.seed, t));
        EXPECT_EQ((r.traces[t].records[0].theta - r.traces[0].records[0].theta).cwiseAbs().maxCoeff(), 0.0);
    }
    double mean = 0.0;
    for (const auto& t : r.traces) mean += t.records[5].cost_sampled;
    EXPECT_NEAR(r.sampled[5].mean, mean / 4, 1e-12);
    EXPECT_THROW(multi_trial(c, ising_ring(3), cfg, 0), DomainError);
}

TEST(MultiTrial, ZeroNoiseMatchesNoiseless) {
    OptimizerConfig cfg;
    cfg.iterations = 6;
    cfg.init = InitPolicy::UniformSmall;
    const auto a = multi_trial(build_qaoa(QaoaSpec::ring(3, 1), NoNoise{}), ising_ring(3), cfg, 3);
    const auto b = multi_trial(fixture::noisy_ring(3, 1, 0.0), ising_ring(3), cfg, 3);
    for (std::size_t i = 0; i < a.sampled.size(); ++i) EXPECT_NEAR(a.sampled[i].mean, b.sampled[i].mean, 1e-12);
}

TEST(MultiTrial, AveragingNarrowsSpread) {
    const auto c = fixture::noisy_ring(3, 1, 0.1);
    OptimizerConfig cfg;
    cfg.iterations = 10;
    cfg.shots = 20;
    cfg.cost_shots = 20;
    cfg.init = InitPolicy::UniformSmall;
    const auto few = multi_trial(c, ising_ring(3), cfg, 4);
    const auto many = multi_trial(c, ising_ring(3), cfg, 40);
    for (int i : {0, 4, 9}) {
        EXPECT_LT(many.sampled[i].ci_high - many.sampled[i].ci_low, few.sampled[i].ci_high - few.sampled[i].ci_low);
    }
}

TEST(MinimizeExact, FindsExactAnsatzOptimum) {
    const auto c = build_qaoa(QaoaSpec::ring(4, 2), NoNoise{});
    const auto m = minimize_exact(c, ising_ring(4), ExactMinimizerConfig{});
    EXPECT_NEAR(m.cost, -4.0, 1e-7);
    EXPECT_NEAR(cost(c, ising_ring(4), m.theta), m.cost, 1e-12);
}

TEST(MinimizeExact, UsesGivenStarts) {
    const auto c = build_qaoa(QaoaSpec::ring(3, 1), NoNoise{});
    ExactMinimizerConfig cfg;
    cfg.restarts = 0;
    const auto m = minimize_exact(c, ising_ring(3), cfg, {RVector::Zero(2)});
    EXPECT_NEAR(m.cost, 0.0, 1e-12);  // zero gradient at the start
    EXPECT_THROW(minimize_exact(c, ising_ring(3), cfg), DomainError);
}
