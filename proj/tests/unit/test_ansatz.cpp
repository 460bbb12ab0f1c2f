#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "nvqo/ansatz.hpp"
#include "nvqo/error.hpp"

using namespace nvqo;

namespace {

std::vector<NoiseSpec> noise_models(int n) {
    DeviceNoise device;
    device.table = device.table.with_scale(4.0);
    return {NoNoise{}, ZDepolarizing{0.17}, ThermalRelaxation{{20.0}, {30.0}, 0.9}, device,
            GaussianFluctuation{0.3, 16, 5}, ThermalRelaxation{std::vector<double>(n, 12.0), std::vector<double>(n, 20.0), 0.3}};
}

}  // namespace

TEST(IsingRing, TermsOfThreeQubitRing) {
    const PauliSum h = ising_ring(3);
    std::vector<std::string> got;
    for (const auto& t : h.terms()) {
        EXPECT_EQ(t.coefficient, 1.0);
        got.push_back(t.string.str());
    }
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, (std::vector<std::string>{"IZZ", "ZIZ", "ZZI"}));
    EXPECT_THROW(ising_ring(2), DomainError);
}

TEST(TransverseMixer, IsMinusSumOfX) {
    const PauliSum m = transverse_mixer(2);
    EXPECT_LE((m.realize() + PauliSum::parse("1 XI\n1 IX").realize()).norm(), 1e-15);
}

TEST(Qaoa, ParameterCounts) {
    EXPECT_EQ(QaoaSpec::ring(8, 3).nparams(), 6);
    EXPECT_EQ(QaoaSpec::ring(6, 10).nparams(), 20);
    EXPECT_EQ(build_qaoa(QaoaSpec::ring(6, 10), NoNoise{}).nparams(), 20);
    EXPECT_THROW(build_qaoa(QaoaSpec::ring(4, 0), NoNoise{}), Error);
}

TEST(Qaoa, GatesAlternateCostAndMixer) {
    const auto c = build_qaoa(QaoaSpec::ring(4, 2), NoNoise{});
    for (int j = 0; j < c.nparams(); ++j) EXPECT_EQ(c.gates()[j].generator.is_diagonal(), j % 2 == 0);
}

TEST(Qaoa, RejectsNonDiagonalCost) {
    QaoaSpec spec = QaoaSpec::ring(3, 1);
    spec.cost_hamiltonian = transverse_mixer(3);
    EXPECT_THROW(build_qaoa(spec, NoNoise{}), Error);
}

TEST(Evolve, ZeroAnglesGivePlusState) {
    const auto c = build_qaoa(QaoaSpec::ring(4, 2), NoNoise{});
    const RVector zero = RVector::Zero(4);
    EXPECT_LE((evolve(c, zero).matrix() - plus_state(4).projector()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(cost(c, ising_ring(4), zero), 0.0, 1e-14);
}

TEST(Evolve, InverseCircuitRestoresInitialState) {
    Rng rng(1);
    const auto c = build_qaoa(QaoaSpec::ring(4, 3), NoNoise{});
    const RVector theta = fixture::random_angles(6, rng);
    CVector v = evolve_pure(c, theta).amplitudes();
    for (int j = c.nparams() - 1; j >= 0; --j) GeneratorExp(c.gates()[j].generator).apply(v, -theta[j]);
    EXPECT_LE((v - plus_state(4).amplitudes()).norm(), 1e-9);
}

TEST(Evolve, NoiselessPurityIsOne) {
    Rng rng(2);
    const auto c = build_qaoa(QaoaSpec::ring(5, 2), NoNoise{});
    for (int t = 0; t < 10; ++t) EXPECT_NEAR(evolve(c, fixture::random_angles(4, rng)).purity(), 1.0, 1e-9);
}

TEST(Evolve, FullDephasingLowersPurity) {
    const auto c = fixture::noisy_ring(3, 1, 0.5);
    RVector theta(2);
    theta << 0.4, 0.3;
    EXPECT_LT(evolve(c, theta).purity(), 1.0 - 1e-6);
}

TEST(Evolve, PureEvolutionAgreesWithDensityEvolution) {
    Rng rng(3);
    const auto c = build_qaoa(QaoaSpec::ring(4, 2), NoNoise{});
    const RVector theta = fixture::random_angles(4, rng);
    EXPECT_LE((evolve(c, theta).matrix() - evolve_pure(c, theta).projector()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(evolve_pure(fixture::noisy_ring(3, 1, 0.1), RVector::Zero(2)), UnsupportedError);
}

TEST(Evolve, RejectsWrongParameterCount) {
    const auto c = build_qaoa(QaoaSpec::ring(3, 1), NoNoise{});
    EXPECT_THROW(evolve(c, RVector::Zero(3)), DimensionError);
}

TEST(Derivatives, SingleQubitExample) {
    const PureState plus = plus_state(1);
    const auto c = ParametricCircuit::from_generators({PauliSum::parse("1 Z")}, NoNoise{}, plus);
    const auto ev = evolve_with_derivatives(c, RVector::Zero(1));
    const CMatrix z = PauliSum::parse("1 Z").realize();
    const CMatrix p = plus.projector();
    const CMatrix expect = cplx(0, -1) * (z * p - p * z);
    EXPECT_LE((ev.derivatives[0] - expect).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((oracle::state_difference(c, RVector::Zero(1), 0, 1e-5) - expect).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Derivatives, GeneratorCommutingWithStateGivesExactZero) {
    const auto c = ParametricCircuit::from_generators({PauliSum::parse("1 ZI"), PauliSum::parse("1 XX")}, NoNoise{},
                                                      PureState::basis(2, 0));
    RVector theta(2);
    theta << 0.3, 0.2;
    const auto ev = evolve_with_derivatives(c, theta);
    EXPECT_EQ(ev.derivatives[0].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Derivatives, MatchFiniteDifferencesUnderEveryNoiseModel) {
    Rng rng(4);
    for (const auto& noise : noise_models(3)) {
        const auto c = build_qaoa(QaoaSpec::ring(3, 2), noise);
        const RVector theta = fixture::random_angles(4, rng);
        const auto ev = evolve_with_derivatives(c, theta);
        for (int j = 0; j < 4; ++j) {
            EXPECT_LE((ev.derivatives[j] - oracle::state_difference(c, theta, j, 1e-5)).cwiseAbs().maxCoeff(), 1e-7)
                << describe(noise) << " j=" << j;
        }
    }
}

TEST(CostGradient, MatchesFiniteDifferencesUpToSixQubits) {
    Rng rng(5);
    for (auto [n, layers] : {std::pair{3, 4}, std::pair{4, 2}, std::pair{6, 1}}) {
        for (double eta : {0.0, 0.12}) {
            const auto c = fixture::noisy_ring(n, layers, eta);
            const PauliSum h = ising_ring(n);
            const RVector theta = fixture::random_angles(2 * layers, rng);
            const auto fd = oracle::central_difference([&](const RVector& t) { return cost(c, h, t); }, theta, 1e-5);
            const auto cg = cost_gradient(c, h, theta);
            EXPECT_LE((cg.gradient - fd).cwiseAbs().maxCoeff(), 1e-6);
            EXPECT_NEAR(cg.cost, cost(c, h, theta), 1e-12);
            const auto ev = evolve_with_derivatives(c, theta);
            for (int j = 0; j < c.nparams(); ++j) {
                EXPECT_NEAR(trace_product(ev.derivatives[j], h.realize()).real(), cg.gradient[j], 1e-10);
            }
        }
    }
}

TEST(CostGradient, NonDiagonalObservableUnderDeviceNoise) {
    Rng rng(6);
    DeviceNoise d;
    d.table = d.table.with_scale(10.0);
    const auto c = build_qaoa(QaoaSpec::ring(3, 1), d);
    const PauliSum h = PauliSum::parse("0.5 XYZ\n-1 ZXI\n0.3 IIY");
    const RVector theta = fixture::random_angles(2, rng);
    const auto fd = oracle::central_difference([&](const RVector& t) { return cost(c, h, t); }, theta, 1e-5);
    EXPECT_LE((cost_gradient(c, h, theta).gradient - fd).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(NoisePlacement, DephasingCommutesWithDiagonalGenerators) {
    // All generators diagonal: placing the noise before or after each gate
    // gives the same output.
    const std::vector<PauliSum> gens{PauliSum::parse("1 ZZI"), PauliSum::parse("1 IZZ\n0.5 ZII"), PauliSum::parse("-1 ZIZ")};
    const PureState psi0 = plus_state(3);
    const auto c = ParametricCircuit::from_generators(gens, ZDepolarizing{0.2}, psi0);
    RVector theta(3);
    theta << 0.7, -1.2, 0.4;
    CMatrix rho = psi0.projector();
    for (std::size_t j = 0; j < gens.size(); ++j) {
        rho = nvqo::apply(z_depolarizing(0.2, {0, 1, 2}), rho);
        GeneratorExp(gens[j]).conjugate(rho, theta[static_cast<Eigen::Index>(j)]);
    }
    EXPECT_LE((evolve(c, theta).matrix() - rho).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NoisePlacement, NoiseFollowsTheUnitary) {
    const PureState psi0 = PureState::basis(1, 0);
    const auto c = ParametricCircuit::from_generators({PauliSum::parse("1 X")}, ZDepolarizing{0.25}, psi0);
    RVector theta(1);
    theta << 0.6;
    CMatrix rho = psi0.projector();
    GeneratorExp(PauliSum::parse("1 X")).conjugate(rho, 0.6);
    rho = nvqo::apply(z_depolarizing(0.25, {0}), rho);
    EXPECT_LE((evolve(c, theta).matrix() - rho).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ZeroStrengthNoise, MatchesNoiselessCircuit) {
    Rng rng(7);
    const auto a = fixture::noisy_ring(4, 2, 0.0);
    const auto b = build_qaoa(QaoaSpec::ring(4, 2), NoNoise{});
    const RVector theta = fixture::random_angles(4, rng);
    EXPECT_LE((evolve(a, theta).matrix() - evolve(b, theta).matrix()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_TRUE(fixture::noisy_ring(3, 1, 0.2).ideal().noiseless());
}

TEST(GaussianNoise, LayerGeneratorsNeedSamples) {
    EXPECT_THROW(build_qaoa(QaoaSpec::ring(3, 1), GaussianFluctuation{0.2, 0, 0}), DomainError);
    const auto a = build_qaoa(QaoaSpec::ring(3, 1), GaussianFluctuation{0.2, 32, 9});
    const auto b = build_qaoa(QaoaSpec::ring(3, 1), GaussianFluctuation{0.2, 32, 9});
    RVector theta(2);
    theta << 0.3, 0.5;
    EXPECT_EQ((evolve(a, theta).matrix() - evolve(b, theta).matrix()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GaussianNoise, SingleStringGeneratorsAreExact) {
    const auto c = ParametricCircuit::from_generators({PauliSum::parse("1 X")}, GaussianFluctuation{0.4, 0, 0},
                                                      PureState::basis(1, 0));
    const RVector theta = RVector::Constant(1, 0.3);
    // <Z> = cos(2 theta) * E[cos(2 v)] = cos(2 theta) exp(-2 sigma^2)
    EXPECT_NEAR(cost(c, PauliSum::parse("1 Z"), theta), std::cos(0.6) * std::exp(-2 * 0.16), 1e-14);
}

TEST(DeviceNoise, ElementaryDecomposition) {
    DeviceNoise d;
    const auto c = build_qaoa(QaoaSpec::ring(4, 1), d);
    EXPECT_EQ(c.gates()[0].steps.size(), 4u);  // four ZZ edges
    EXPECT_EQ(c.gates()[1].steps.size(), 4u);  // four X rotations
    EXPECT_NE(c.decomposition().find("elementary"), std::string::npos);
    // depolarizing + one thermal op per touched qubit
    EXPECT_EQ(c.gates()[0].steps[0].noise.size(), 3u);
    EXPECT_EQ(c.gates()[1].steps[0].noise.size(), 2u);
    EXPECT_NE(build_qaoa(QaoaSpec::ring(4, 1), ZDepolarizing{0.1}).decomposition().find("layer"), std::string::npos);
}

TEST(DeviceNoise, ZeroScaleIsNoiseless) {
    Rng rng(8);
    DeviceNoise d;
    d.table = d.table.with_scale(0.0);
    const auto a = build_qaoa(QaoaSpec::ring(3, 1), d);
    const auto b = build_qaoa(QaoaSpec::ring(3, 1), NoNoise{});
    const RVector theta = fixture::random_angles(2, rng);
    EXPECT_LE((evolve(a, theta).matrix() - evolve(b, theta).matrix()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(DeviceNoise, RejectsNonCommutingTerms) {
    DeviceNoise d;
    EXPECT_THROW(ParametricCircuit::from_generators({PauliSum::parse("1 XI\n1 ZI")}, d, plus_state(2)),
                 UnsupportedError);
    EXPECT_THROW(ParametricCircuit::from_generators({PauliSum::parse("1 ZZZ")}, d, plus_state(3)), UnsupportedError);
}

TEST(ThermalNoise, BroadcastAndPerQubitAgree) {
    Rng rng(9);
    const auto a = build_qaoa(QaoaSpec::ring(3, 1), ThermalRelaxation{{30.0}, {40.0}, 0.5});
    const auto b = build_qaoa(QaoaSpec::ring(3, 1), ThermalRelaxation{{30.0, 30.0, 30.0}, {40.0, 40.0, 40.0}, 0.5});
    const RVector theta = fixture::random_angles(2, rng);
    EXPECT_LE((evolve(a, theta).matrix() - evolve(b, theta).matrix()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(build_qaoa(QaoaSpec::ring(3, 1), ThermalRelaxation{{30.0, 30.0}, {40.0, 40.0}, 0.5}), ConfigError);
}

TEST(Describe, NamesTheModel) {
    EXPECT_NE(describe(ZDepolarizing{0.1}).find("z-depolarizing"), std::string::npos);
    EXPECT_NE(describe(NoNoise{}).find("none"), std::string::npos);
}
