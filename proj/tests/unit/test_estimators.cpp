#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "nvqo/error.hpp"
#include "nvqo/estimators.hpp"

using namespace nvqo;

namespace {

// d|psi>/d theta_j by applying the gates with -i G_j inserted after gate j.
CVector pure_derivative(const ParametricCircuit& c, const RVector& theta, int j) {
    CVector v = c.initial_state().amplitudes();
    for (int k = 0; k < c.nparams(); ++k) {
        const GeneratorExp exp(c.gates()[k].generator);
        exp.apply(v, theta[k]);
        if (k == j) v = cplx(0, -1) * (c.gates()[k].generator.realize() * v);
    }
    return v;
}

struct Instance {
    ParametricCircuit circuit;
    PauliSum h;
    RVector theta;
};

std::vector<Instance> small_instances(Rng& rng) {
    std::vector<Instance> out;
    for (double eta : {0.0, 0.1, 0.3}) {
        out.push_back({fixture::noisy_ring(3, 1, eta), ising_ring(3), fixture::random_angles(2, rng)});
        out.push_back({fixture::noisy_ring(3, 2, eta), ising_ring(3), fixture::random_angles(4, rng)});
    }
    const std::vector<PauliSum> gens{PauliSum::parse("1 XY"), PauliSum::parse("1 ZI"), PauliSum::parse("1 IX")};
    out.push_back({ParametricCircuit::from_generators(gens, ThermalRelaxation{{5.0}, {7.0}, 0.4}, PureState::basis(2, 1)),
                   PauliSum::parse("1 ZZ\n-0.5 IZ"), fixture::random_angles(3, rng)});
    out.push_back({ParametricCircuit::from_generators(gens, NoNoise{}, PureState::basis(2, 2)),
                   PauliSum::parse("0.7 XX\n-0.5 YZ"), fixture::random_angles(3, rng)});
    return out;
}

}  // namespace

TEST(Sld, ZeroDerivative) {
    Rng rng(1);
    const DensityMatrix rho(fixture::random_density(4, rng));
    const SldResult r = solve_sld(rho, CMatrix::Zero(4, 4));
    EXPECT_EQ(r.L.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.qfi, 0.0);
}

TEST(Sld, ClassicalFisherInformation) {
    const double p = 0.3, q = 0.12;
    CMatrix rho = CMatrix::Zero(2, 2), drho = CMatrix::Zero(2, 2);
    rho(0, 0) = p;
    rho(1, 1) = 1 - p;
    drho(0, 0) = q;
    drho(1, 1) = -q;
    const SldResult r = solve_sld(DensityMatrix(rho), drho);
    EXPECT_NEAR(r.L(0, 0).real(), q / p, 1e-14);
    EXPECT_NEAR(r.L(1, 1).real(), -q / (1 - p), 1e-14);
    EXPECT_NEAR(std::abs(r.L(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(r.qfi, q * q / p + q * q / (1 - p), 1e-14);
}

TEST(Sld, PureStateSatisfiesEquation) {
    Rng rng(2);
    const PureState psi(fixture::random_vector(8, rng));
    const CMatrix h = fixture::random_hermitian(8, rng);
    const CMatrix rho = psi.projector();
    const CMatrix drho = cplx(0, -1) * (h * rho - rho * h);
    const SldResult r = solve_sld(DensityMatrix::from_pure(psi), drho);
    EXPECT_LE(sld_residual(rho, drho, r.L), 1e-9);
    EXPECT_LE((r.L - 2.0 * drho).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Sld, MatchesLyapunovOracleOnFullRankStates) {
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        const CMatrix rho = fixture::random_density(4, rng);
        CMatrix drho = fixture::random_hermitian(4, rng);
        drho -= (drho.trace() / 4.0) * CMatrix::Identity(4, 4);
        const SldResult r = solve_sld(DensityMatrix(rho), drho);
        EXPECT_LE((r.L - oracle::sld_lyapunov(rho, drho)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_NEAR(r.qfi, (rho * r.L * r.L).trace().real(), 1e-10);
        EXPECT_EQ(r.support_dim, 16);
    }
}

TEST(Sld, RejectsInvalidDerivative) {
    const DensityMatrix rho = DensityMatrix::maximally_mixed(1);
    CMatrix nonh(2, 2);
    nonh << 0, 1, 0, 0;
    EXPECT_THROW(solve_sld(rho, nonh), DomainError);
    EXPECT_THROW(solve_sld(rho, CMatrix::Identity(2, 2) * 0.1), DomainError);
}

TEST(Sld, ResidualAndTracelessOnNoisyStates) {
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto c = fixture::noisy_ring(3, 1 + t % 3, 0.4 * rng.uniform());
        const auto ev = evolve_with_derivatives(c, fixture::random_angles(c.nparams(), rng));
        const SldSolver solver(ev.rho.matrix());
        for (const auto& d : ev.derivatives) {
            const SldResult r = solver.solve(d);
            EXPECT_LE(sld_residual(ev.rho.matrix(), d, r.L), 1e-9);
            EXPECT_LE(std::abs((ev.rho.matrix() * r.L).trace()), 1e-9);
            EXPECT_GE(r.qfi, 0.0);
        }
    }
}

TEST(Qfi, SingleQubitRotation) {
    const auto c = ParametricCircuit::from_generators({PauliSum::parse("1 X")}, NoNoise{}, PureState::basis(1, 0));
    for (double th : {0.0, 0.4, 2.0}) EXPECT_NEAR(qfi_vector(c, RVector::Constant(1, th))[0], 4.0, 1e-12);
}

TEST(Qfi, VanishesWhenStateDoesNotMove) {
    // Z rotations of |0> under dephasing: the state never leaves |0><0|.
    const auto c = ParametricCircuit::from_generators({PauliSum::parse("1 Z"), PauliSum::parse("1 Z")},
                                                      ZDepolarizing{0.5}, PureState::basis(1, 0));
    const RVector q = qfi_vector(c, RVector::Constant(2, 0.3));
    EXPECT_NEAR(q[0], 0.0, 1e-12);
    EXPECT_NEAR(q[1], 0.0, 1e-12);
}

TEST(Qfi, ZeroStrengthNoiseMatchesNoiseless) {
    Rng rng(5);
    const RVector theta = fixture::random_angles(4, rng);
    const RVector a = qfi_vector(fixture::noisy_ring(4, 2, 0.0), theta);
    const RVector b = qfi_vector(build_qaoa(QaoaSpec::ring(4, 2), NoNoise{}), theta);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Qfi, PureStateFormula) {
    Rng rng(6);
    const auto c = build_qaoa(QaoaSpec::ring(4, 2), NoNoise{});
    for (int t = 0; t < 5; ++t) {
        const RVector theta = fixture::random_angles(4, rng);
        const RVector q = qfi_vector(c, theta);
        const CVector psi = evolve_pure(c, theta).amplitudes();
        for (int j = 0; j < 4; ++j) {
            const CVector d = pure_derivative(c, theta, j);
            const double expect = 4.0 * (d.squaredNorm() - std::norm(psi.dot(d)));
            EXPECT_NEAR(q[j], expect, 1e-9);
        }
    }
}

TEST(GradientObservable, MeanIndependentOfBaseline) {
    Rng rng(7);
    const auto c = fixture::noisy_ring(3, 2, 0.2);
    const RVector theta = fixture::random_angles(4, rng);
    const auto ev = evolve_with_derivatives(c, theta);
    const PauliSum h = ising_ring(3);
    const auto fd = oracle::central_difference([&](const RVector& t) { return cost(c, h, t); }, theta, 1e-5);
    for (int j = 0; j < 4; ++j) {
        const SldResult sld = solve_sld(ev.rho, ev.derivatives[j]);
        for (double lambda : {-1.0, 0.0, 1.0}) {
            const CMatrix g = gradient_observable(h, sld, lambda);
            EXPECT_LE((g - g.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
            const double mean = trace_product(ev.rho.matrix(), g).real();
            EXPECT_NEAR(mean, trace_product(ev.derivatives[j], h.realize()).real(), 1e-9);
            EXPECT_NEAR(mean, fd[j], 1e-6);
        }
    }
}

TEST(GradientObservable, IdentityHamiltonianHasZeroMean) {
    Rng rng(8);
    const auto c = fixture::noisy_ring(3, 1, 0.1);
    const auto ev = evolve_with_derivatives(c, fixture::random_angles(2, rng));
    const PauliSum id(3, {{1.0, PauliString::identity(3)}});
    const SldResult sld = solve_sld(ev.rho, ev.derivatives[1]);
    for (double lambda : {0.0, 0.5}) {
        const CMatrix g = gradient_observable(id, sld, lambda);
        EXPECT_LE((g - (1.0 + lambda) * sld.L).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(trace_product(ev.rho.matrix(), g).real(), 0.0, 1e-10);
    }
}

TEST(Baseline, SymmetricInstanceHasZeroOptimum) {
    const auto c = ParametricCircuit::from_generators({PauliSum::parse("1 X")}, NoNoise{}, PureState::basis(1, 0));
    const auto ev = evolve_with_derivatives(c, RVector::Zero(1));
    const PauliSum z = PauliSum::parse("1 Z");
    const SldResult sld = solve_sld(ev.rho, ev.derivatives[0]);
    EXPECT_NEAR(baseline_numerator(ev.rho.matrix(), z, sld.L), 0.0, 1e-14);
    EXPECT_NEAR(optimal_baseline(ev.rho, z, sld), 0.0, 1e-14);
}

TEST(Baseline, UndefinedWithoutInformation) {
    const SldResult zero = solve_sld(DensityMatrix::maximally_mixed(1), CMatrix::Zero(2, 2));
    EXPECT_THROW(optimal_baseline(DensityMatrix::maximally_mixed(1), PauliSum::parse("1 Z"), zero), DomainError);
    EXPECT_EQ(LambdaPolicy::optimal().resolve(CMatrix::Identity(2, 2) / 2.0, PauliSum::parse("1 Z"), zero), 0.0);
}

TEST(Baseline, SecondMomentIsParabolaWithQfiCurvature) {
    Rng rng(9);
    for (int t = 0; t < 10; ++t) {
        const auto c = fixture::noisy_ring(3, 2, 0.3 * rng.uniform());
        const auto ev = evolve_with_derivatives(c, fixture::random_angles(4, rng));
        const PauliSum h = ising_ring(3);
        const int j = t % 4;
        const SldResult sld = solve_sld(ev.rho, ev.derivatives[j]);
        if (sld.qfi < 1e-8) continue;
        auto second = [&](double lambda) {
            return sld_outcomes(ev.rho.matrix(), gradient_observable(h, sld, lambda)).second_moment();
        };
        const double opt = optimal_baseline(ev.rho, h, sld);
        for (double lambda : {-2.0, -0.5, 0.0, 0.7, 2.0}) {
            EXPECT_NEAR(second(lambda) - second(opt), sld.qfi * std::pow(lambda - opt, 2), 1e-8);
            EXPECT_LE(second(opt), second(lambda) + 1e-10);
        }
    }
}

TEST(Unbiasedness, ExhaustiveEnumerationForEveryEstimator) {
    Rng rng(10);
    for (const auto& inst : small_instances(rng)) {
        const auto ev = evolve_with_derivatives(inst.circuit, inst.theta);
        const MeasurementBasis basis(inst.h);
        const CMatrix hm = inst.h.realize();
        const auto sld = sld_moments(ev, inst.h, LambdaPolicy::zero());
        const auto sld_opt = sld_moments(ev, inst.h, LambdaPolicy::optimal());
        const auto ld = ld_moments(ev, inst.h);
        for (int j = 0; j < inst.circuit.nparams(); ++j) {
            const double exact = trace_product(ev.derivatives[j], hm).real();
            EXPECT_NEAR(sld.mean[j], exact, 1e-8);
            EXPECT_NEAR(sld_opt.mean[j], exact, 1e-8);
            EXPECT_NEAR(ld.mean[j], exact, 1e-8);
            // Independent routes to the same distributions.
            const CMatrix l = oracle::sld_lyapunov(ev.rho.matrix(), ev.derivatives[j]);
            const CMatrix g = 0.5 * (hm * l + l * hm);
            const auto om = oracle::observable_moments(ev.rho.matrix(), g);
            EXPECT_NEAR(om.mean, exact, 1e-8);
            EXPECT_NEAR(om.second, sld.second_moment[j], 1e-6 * std::max(1.0, om.second));
            if (basis.diagonal()) {
                const auto lm = oracle::log_derivative_moments(ev.rho.matrix(), ev.derivatives[j], basis.energies());
                EXPECT_NEAR(lm.mean, exact, 1e-8);
                EXPECT_NEAR(lm.second, ld.second_moment[j], 1e-8 * std::max(1.0, lm.second));
            }
        }
        if (inst.circuit.noiseless()) {
            const auto hd = hadamard_moments(inst.circuit, inst.theta, inst.h);
            for (int j = 0; j < inst.circuit.nparams(); ++j) {
                EXPECT_NEAR(hd.mean[j], trace_product(ev.derivatives[j], hm).real(), 1e-8);
            }
        }
    }
}

TEST(SecondMoment, BoundedByQfiPerComponent) {
    Rng rng(11);
    for (const auto& inst : small_instances(rng)) {
        const auto ev = evolve_with_derivatives(inst.circuit, inst.theta);
        const double hn2 = std::pow(op_norm_inf(inst.h), 2);
        const SldSolver solver(ev.rho.matrix());
        const auto sld = sld_moments(ev, inst.h, LambdaPolicy::zero());
        const auto ld = ld_moments(ev, inst.h);
        for (int j = 0; j < inst.circuit.nparams(); ++j) {
            const double qfi = solver.solve(ev.derivatives[j]).qfi;
            EXPECT_LE(sld.second_moment[j], hn2 * qfi + 1e-9);
            EXPECT_LE(ld.second_moment[j], hn2 * qfi + 1e-9);
        }
    }
}

TEST(Samplers, ExactModeReturnsGradient) {
    Rng rng(12);
    const auto c = fixture::noisy_ring(3, 2, 0.1);
    const RVector theta = fixture::random_angles(4, rng);
    const PauliSum h = ising_ring(3);
    const RVector grad = cost_gradient(c, h, theta).gradient;
    for (auto kind : {EstimatorKind::SLD, EstimatorKind::LD}) {
        const auto s = sample_gradient(kind, c, theta, h, 0, LambdaPolicy::zero(), 1);
        EXPECT_LE((s.values - grad).cwiseAbs().maxCoeff(), 1e-9) << to_string(kind);
        EXPECT_EQ(s.kind, kind);
    }
    const auto ideal = c.ideal();
    const RVector g0 = cost_gradient(ideal, h, theta).gradient;
    EXPECT_LE((hadamard_test_gradient(ideal, theta, h, 0, 1).values - g0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Samplers, EmpiricalMeanWithinFiveStandardErrors) {
    Rng rng(13);
    const auto c = fixture::noisy_ring(3, 1, 0.15);
    const RVector theta = fixture::random_angles(2, rng);
    const PauliSum h = ising_ring(3);
    const RVector grad = cost_gradient(c, h, theta).gradient;
    const int shots = 100000;
    const auto sld = sample_sld_gradient(c, theta, h, shots, LambdaPolicy::zero(), 5);
    const auto ld = sample_ld_gradient(c, theta, h, shots, 6);
    const auto ev = evolve_with_derivatives(c, theta);
    const auto msld = sld_moments(ev, h, LambdaPolicy::zero());
    const auto mld = ld_moments(ev, h);
    for (int j = 0; j < 2; ++j) {
        const double se_sld = std::sqrt((msld.second_moment[j] - grad[j] * grad[j]) / shots);
        const double se_ld = std::sqrt((mld.second_moment[j] - grad[j] * grad[j]) / shots);
        EXPECT_LE(std::abs(sld.values[j] - grad[j]), 5 * se_sld + 1e-12);
        EXPECT_LE(std::abs(ld.values[j] - grad[j]), 5 * se_ld + 1e-12);
    }
    EXPECT_EQ(sld.shots_used, 2L * shots);
}

TEST(Samplers, HadamardShotsConverge) {
    Rng rng(14);
    const auto c = build_qaoa(QaoaSpec::ring(3, 1), NoNoise{});
    const RVector theta = fixture::random_angles(2, rng);
    const PauliSum h = ising_ring(3);
    const RVector grad = cost_gradient(c, h, theta).gradient;
    const auto m = hadamard_moments(c, theta, h);
    const int shots = 20000;
    const auto s = hadamard_test_gradient(c, theta, h, shots, 3);
    for (int j = 0; j < 2; ++j) {
        const double se = std::sqrt((m.second_moment[j] - grad[j] * grad[j]) / shots);
        EXPECT_LE(std::abs(s.values[j] - grad[j]), 5 * se + 1e-12);
    }
}

TEST(Samplers, SameSeedSameSample) {
    const auto c = fixture::noisy_ring(3, 1, 0.2);
    RVector theta(2);
    theta << 0.3, -0.4;
    const PauliSum h = ising_ring(3);
    for (auto kind : {EstimatorKind::SLD, EstimatorKind::LD}) {
        const auto a = sample_gradient(kind, c, theta, h, 50, LambdaPolicy::zero(), 42);
        const auto b = sample_gradient(kind, c, theta, h, 50, LambdaPolicy::zero(), 42);
        EXPECT_EQ((a.values - b.values).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(LogDerivative, IdentityObservableHasZeroMean) {
    Rng rng(15);
    const auto c = fixture::noisy_ring(3, 1, 0.1);
    const auto ev = evolve_with_derivatives(c, fixture::random_angles(2, rng));
    const PauliSum id(3, {{1.0, PauliString::identity(3)}});
    const auto m = ld_moments(ev, id);
    EXPECT_LE(m.mean.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LogDerivative, ParameterWithoutEffectOnProbabilitiesGivesZero) {
    const std::vector<PauliSum> gens{PauliSum::parse("1 XI"), PauliSum::parse("1 ZZ")};
    const auto c = ParametricCircuit::from_generators(gens, NoNoise{}, PureState::basis(2, 0));
    RVector theta(2);
    theta << 0.4, 0.9;
    const auto s = sample_ld_gradient(c, theta, PauliSum::parse("1 ZZ\n0.5 ZI"), 200, 1);
    EXPECT_EQ(s.values[1], 0.0);
}

TEST(Hadamard, NoisyCircuitRejected) {
    EXPECT_THROW(hadamard_test_gradient(fixture::noisy_ring(3, 1, 0.1), RVector::Zero(2), ising_ring(3), 10, 1),
                 UnsupportedError);
}

TEST(Hadamard, CoinIsFairWhenImaginaryPartVanishes) {
    const auto c = build_qaoa(QaoaSpec::ring(3, 1), NoNoise{});
    const auto terms = hadamard_terms(c, RVector::Zero(2), ising_ring(3));
    ASSERT_FALSE(terms.empty());
    for (const auto& t : terms) EXPECT_NEAR(t.p0, 0.5, 1e-14);
    const auto s = hadamard_test_gradient(c, RVector::Zero(2), ising_ring(3), 2000, 4);
    const auto m = hadamard_moments(c, RVector::Zero(2), ising_ring(3));
    EXPECT_LE(std::abs(s.values[0]), 5.0 * std::sqrt(m.second_moment[0] / 2000));
}

TEST(SampleCost, EigenstateHasNoShotNoise) {
    const auto c = ParametricCircuit::from_generators({PauliSum::parse("1 ZZI")}, NoNoise{}, PureState::basis(3, 5));
    const RVector theta = RVector::Constant(1, 0.8);
    EXPECT_DOUBLE_EQ(sample_cost(c, theta, ising_ring(3), 200, 1), cost(c, ising_ring(3), theta));
}

TEST(SampleCost, ExactModeAndEnumeratedMean) {
    Rng rng(16);
    const auto c = fixture::noisy_ring(3, 1, 0.2);
    const RVector theta = fixture::random_angles(2, rng);
    const PauliSum h = ising_ring(3);
    const DensityMatrix rho = evolve(c, theta);
    EXPECT_DOUBLE_EQ(sample_cost(c, theta, h, 0, 1), cost(c, h, theta));
    const MeasurementBasis basis(h);
    const RVector p = basis.diagonal_of(rho.matrix());
    EXPECT_NEAR(p.dot(basis.energies()), cost(c, h, theta), 1e-12);
}

TEST(EstimatorKind, ParseAndPrint) {
    for (auto k : {EstimatorKind::SLD, EstimatorKind::LD, EstimatorKind::Hadamard}) {
        EXPECT_EQ(parse_estimator_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_estimator_kind("spsa"), Error);
}
