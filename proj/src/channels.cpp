#include "nvqo/channels.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "nvqo/error.hpp"
#include "nvqo/kernels.hpp"
#include "nvqo/rng.hpp"
#include "nvqo/unitary.hpp"

namespace nvqo {
namespace {

CMatrix single_qubit(Pauli p) { return PauliString(std::vector<Pauli>{p}).realize(); }

// Left-multiply the sub-blocks addressed by `offsets` of a flat array by m.
void local_multiply_flat(cplx* data, std::size_t len, const std::vector<std::size_t>& offsets, std::size_t combined,
                         const CMatrix& m) {
    const std::size_t k = offsets.size();
    std::vector<cplx> v(k), w(k);
    for (std::size_t base = 0; base < len; ++base) {
        if (base & combined) continue;
        for (std::size_t j = 0; j < k; ++j) v[j] = data[base + offsets[j]];
        for (std::size_t i = 0; i < k; ++i) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v[j];
            w[i] = acc;
        }
        for (std::size_t i = 0; i < k; ++i) data[base + offsets[i]] = w[i];
    }
}

// x <- K x K^dag with K acting on `targets` of an n-qubit operator.
void conjugate_local(CMatrix& x, const CMatrix& k, const std::vector<int>& targets, int n) {
    const auto d = static_cast<std::size_t>(x.rows());
    const std::size_t len = d * d;
    if (targets.size() == 1) {
        const std::size_t mask = qubit_mask(n, targets[0]);
        cplx m[4] = {k(0, 0), k(0, 1), k(1, 0), k(1, 1)};
        cplx mc[4] = {std::conj(m[0]), std::conj(m[1]), std::conj(m[2]), std::conj(m[3])};
        kernels::apply_1q_flat(x.data(), len, mask, m);
        kernels::apply_1q_flat(x.data(), len, mask * d, mc);
        return;
    }
    const std::size_t arity = targets.size();
    const std::size_t local = std::size_t{1} << arity;
    std::vector<std::size_t> rows(local, 0), cols(local, 0);
    std::size_t combined = 0;
    for (std::size_t i = 0; i < arity; ++i) combined |= qubit_mask(n, targets[i]);
    for (std::size_t j = 0; j < local; ++j) {
        for (std::size_t i = 0; i < arity; ++i) {
            if (j & (std::size_t{1} << (arity - 1 - i))) rows[j] |= qubit_mask(n, targets[i]);
        }
        cols[j] = rows[j] * d;
    }
    local_multiply_flat(x.data(), len, rows, combined, k);
    local_multiply_flat(x.data(), len, cols, combined * d, k.conjugate());
}

bool covers_register(const std::vector<int>& targets, int n) {
    if (static_cast<int>(targets.size()) != n) return false;
    for (int i = 0; i < n; ++i) {
        if (targets[static_cast<std::size_t>(i)] != i) return false;
    }
    return true;
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

KrausChannel::KrausChannel(std::vector<CMatrix> ops, std::vector<int> targets)
    : ops_(std::move(ops)), targets_(std::move(targets)) {
    if (ops_.empty()) throw DomainError("Kraus channel needs at least one operator");
    if (targets_.empty()) throw DimensionError("Kraus channel needs at least one target qubit");
    std::set<int> seen;
    for (int t : targets_) {
        if (t < 0 || !seen.insert(t).second) throw DimensionError("Kraus targets must be distinct and non-negative");
    }
    check_qubit_cap(static_cast<int>(targets_.size()));
    dim_ = dim_of(static_cast<int>(targets_.size()));
    for (const auto& k : ops_) {
        if (static_cast<std::size_t>(k.rows()) != dim_ || static_cast<std::size_t>(k.cols()) != dim_) {
            throw DimensionError("Kraus operator size does not match its targets");
        }
    }
}

KrausChannel KrausChannel::full(std::vector<CMatrix> ops) {
    if (ops.empty()) throw DomainError("Kraus channel needs at least one operator");
    const int n = qubits_for_dim(static_cast<std::size_t>(ops.front().rows()));
    std::vector<int> targets(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) targets[static_cast<std::size_t>(i)] = i;
    return KrausChannel(std::move(ops), std::move(targets));
}

KrausChannel KrausChannel::identity(std::vector<int> targets) {
    const auto d = static_cast<Eigen::Index>(dim_of(static_cast<int>(targets.size())));
    return KrausChannel({CMatrix::Identity(d, d)}, std::move(targets));
}

double KrausChannel::trace_preservation_error() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& k : ops_) sum += k.adjoint() * k;
    return (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

KrausChannel KrausChannel::adjoint() const {
    std::vector<CMatrix> adj;
    adj.reserve(ops_.size());
    for (const auto& k : ops_) adj.push_back(k.adjoint());
    return KrausChannel(std::move(adj), targets_);
}

PauliChannel::PauliChannel(std::vector<std::pair<double, PauliString>> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw DomainError("Pauli channel needs at least one term");
    double total = 0.0;
    for (const auto& [p, s] : terms_) {
        if (p < 0.0) throw DomainError("Pauli channel probabilities must be non-negative");
        if (s.nqubits() != terms_.front().second.nqubits()) throw DimensionError("Pauli channel strings differ in size");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("Pauli channel probabilities must sum to 1");
}

KrausChannel PauliChannel::to_kraus() const {
    std::vector<CMatrix> ops;
    for (const auto& [p, s] : terms_) {
        if (p > 0.0) ops.push_back(std::sqrt(p) * s.realize());
    }
    return KrausChannel::full(std::move(ops));
}

KrausChannel unitary_channel(const PauliSum& generator, double theta) {
    return KrausChannel::full({GeneratorExp(generator).matrix(theta)});
}

KrausChannel z_depolarizing(double eta, const std::vector<int>& qubits) {
    check_probability(eta, "eta");
    if (qubits.empty()) throw DimensionError("z_depolarizing needs at least one qubit");
    const CMatrix id = CMatrix::Identity(2, 2);
    const CMatrix z = single_qubit(Pauli::Z);
    std::vector<CMatrix> ops{CMatrix::Ones(1, 1)};
    for (std::size_t q = 0; q < qubits.size(); ++q) {
        std::vector<CMatrix> next;
        for (const auto& op : ops) {
            for (int which = 0; which < 2; ++which) {
                const CMatrix factor = which == 0 ? CMatrix(std::sqrt(1.0 - eta) * id) : CMatrix(std::sqrt(eta) * z);
                CMatrix kron(op.rows() * 2, op.cols() * 2);
                for (Eigen::Index i = 0; i < op.rows(); ++i) {
                    for (Eigen::Index j = 0; j < op.cols(); ++j) kron.block(2 * i, 2 * j, 2, 2) = op(i, j) * factor;
                }
                next.push_back(std::move(kron));
            }
        }
        ops = std::move(next);
    }
    return KrausChannel(std::move(ops), qubits);
}

std::vector<ChannelOp> z_depolarizing_ops(double eta, int nqubits, const std::vector<int>& qubits) {
    check_probability(eta, "eta");
    std::vector<ChannelOp> out;
    if (eta == 0.0) return out;
    for (int q : qubits) {
        out.emplace_back(PauliChannel({{1.0 - eta, PauliString::identity(nqubits)},
                                       {eta, PauliString::single(nqubits, q, Pauli::Z)}}));
    }
    return out;
}

PauliChannel depolarizing(double p, int nqubits, const std::vector<int>& qubits) {
    check_probability(p, "depolarizing error");
    if (qubits.empty()) throw DimensionError("depolarizing needs at least one qubit");
    const std::size_t k = qubits.size();
    const std::size_t count = std::size_t{1} << (2 * k);
    std::vector<std::pair<double, PauliString>> terms;
    terms.reserve(count);
    for (std::size_t code = 0; code < count; ++code) {
        std::vector<Pauli> axes(static_cast<std::size_t>(nqubits), Pauli::I);
        for (std::size_t i = 0; i < k; ++i) {
            const int q = qubits[i];
            if (q < 0 || q >= nqubits) throw DimensionError("depolarizing target out of range");
            axes[static_cast<std::size_t>(q)] = static_cast<Pauli>((code >> (2 * i)) & 3u);
        }
        const double prob = code == 0 ? 1.0 - p : p / static_cast<double>(count - 1);
        terms.emplace_back(prob, PauliString(std::move(axes)));
    }
    return PauliChannel(std::move(terms));
}

double gaussian_fluctuation_eta(double sigma) {
    if (!(sigma >= 0.0)) throw DomainError("sigma must be non-negative");
    return 0.5 * (1.0 - std::exp(-2.0 * sigma * sigma));
}

KrausChannel gaussian_fluctuation_channel(const PauliSum& generator, double sigma) {
    const double eta = gaussian_fluctuation_eta(sigma);
    if (!generator.is_involutory(1e-10)) throw DomainError("gaussian fluctuation channel needs X^2 = I");
    const CMatrix x = generator.realize();
    const auto d = x.rows();
    return KrausChannel::full({std::sqrt(1.0 - eta) * CMatrix::Identity(d, d), std::sqrt(eta) * x});
}

KrausChannel thermal_relaxation(double t1, double t2, double gate_time, int qubit) {
    if (!(t1 > 0.0)) throw DomainError("T1 must be positive");
    if (!(t2 > 0.0)) throw DomainError("T2 must be positive");
    if (t2 > 2.0 * t1) throw DomainError("T2 must not exceed 2 T1");
    if (!(gate_time >= 0.0)) throw DomainError("gate time must be non-negative");
    const double p_reset = 1.0 - std::exp(-gate_time / t1);
    // Amplitude damping alone leaves coherence sqrt(1 - p_reset); the rest
    // comes from pure dephasing with factor c.
    const double c = std::exp(-gate_time / t2 + gate_time / (2.0 * t1));
    CMatrix a0 = CMatrix::Zero(2, 2);
    a0(0, 0) = 1.0;
    a0(1, 1) = std::sqrt(1.0 - p_reset);
    CMatrix z = single_qubit(Pauli::Z);
    CMatrix reset = CMatrix::Zero(2, 2);
    reset(0, 1) = std::sqrt(p_reset);
    std::vector<CMatrix> ops{std::sqrt(0.5 * (1.0 + c)) * a0};
    if (c < 1.0) ops.push_back(std::sqrt(0.5 * (1.0 - c)) * (z * a0));
    if (p_reset > 0.0) ops.push_back(reset);
    return KrausChannel(std::move(ops), {qubit});
}

CMatrix apply(const KrausChannel& channel, const CMatrix& x) {
    if (x.rows() != x.cols()) throw DimensionError("channel input must be square");
    const int n = qubits_for_dim(static_cast<std::size_t>(x.rows()));
    for (int t : channel.targets()) {
        if (t >= n) throw DimensionError("channel target outside the register");
    }
    CMatrix out = CMatrix::Zero(x.rows(), x.cols());
    if (covers_register(channel.targets(), n)) {
        for (const auto& k : channel.ops()) out.noalias() += k * x * k.adjoint();
        return out;
    }
    const auto& kern = kernels::active();
    CMatrix tmp;
    for (const auto& k : channel.ops()) {
        tmp = x;
        conjugate_local(tmp, k, channel.targets(), n);
        kern.axpy(1.0, tmp.data(), out.data(), static_cast<std::size_t>(out.size()));
    }
    return out;
}

CMatrix apply(const PauliChannel& channel, const CMatrix& x) {
    if (x.rows() != x.cols() || static_cast<std::size_t>(x.rows()) != dim_of(channel.nqubits())) {
        throw DimensionError("Pauli channel / operator size mismatch");
    }
    CMatrix out = CMatrix::Zero(x.rows(), x.cols());
    const auto& kern = kernels::active();
    for (const auto& [p, s] : channel.terms()) {
        if (p == 0.0) continue;
        if (s.is_identity()) {
            kern.axpy(p, x.data(), out.data(), static_cast<std::size_t>(x.size()));
        } else {
            add_conjugation(s, p, x, out);
        }
    }
    return out;
}

CMatrix apply(const ChannelOp& op, const CMatrix& x) {
    return std::visit([&](const auto& ch) { return nvqo::apply(ch, x); }, op);
}

CMatrix apply_adjoint(const ChannelOp& op, const CMatrix& x) {
    if (const auto* k = std::get_if<KrausChannel>(&op)) return nvqo::apply(k->adjoint(), x);
    return nvqo::apply(std::get<PauliChannel>(op), x);  // Pauli channels are self-adjoint
}

DensityMatrix apply(const KrausChannel& channel, const DensityMatrix& rho) {
    CMatrix out = nvqo::apply(channel, rho.matrix());
    if (std::abs(out.trace().real() - 1.0) > 1e-9) throw NumericalError("channel application changed the trace");
    hermitize(out);
    return DensityMatrix::trusted(std::move(out));
}

KrausChannel compose(const KrausChannel& after, const KrausChannel& before) {
    if (after.targets() != before.targets()) throw DimensionError("compose: channels act on different targets");
    std::vector<CMatrix> ops;
    ops.reserve(after.ops().size() * before.ops().size());
    for (const auto& b : after.ops()) {
        for (const auto& a : before.ops()) ops.push_back(b * a);
    }
    return KrausChannel(std::move(ops), after.targets());
}

CMatrix choi_of_map(std::size_t dim, const std::function<CMatrix(const CMatrix&)>& map) {
    const auto d = static_cast<Eigen::Index>(dim);
    CMatrix j = CMatrix::Zero(d * d, d * d);
    CMatrix unit = CMatrix::Zero(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            unit(a, b) = 1.0;
            const CMatrix image = map(unit);
            if (image.rows() != d || image.cols() != d) throw DimensionError("choi_of_map: map changed the dimension");
            j.block(a * d, b * d, d, d) = image;
            unit(a, b) = 0.0;
        }
    }
    return j;
}

CMatrix choi(const KrausChannel& channel) {
    check_qubit_cap(2 * channel.arity());
    const auto d = static_cast<Eigen::Index>(channel.dim());
    CMatrix j = CMatrix::Zero(d * d, d * d);
    CVector v(d * d);
    for (const auto& k : channel.ops()) {
        // |K>> = sum_i |i> (x) K|i>
        for (Eigen::Index i = 0; i < d; ++i) v.segment(i * d, d) = k.col(i);
        j.noalias() += v * v.adjoint();
    }
    return j;
}

DistanceBounds choi_distance_bounds(const CMatrix& choi_a, const CMatrix& choi_b, std::size_t dim) {
    if (choi_a.rows() != choi_b.rows() || static_cast<std::size_t>(choi_a.rows()) != dim * dim) {
        throw DimensionError("Choi matrices differ in size");
    }
    CMatrix diff = choi_a - choi_b;
    hermitize(diff);
    const double norm = trace_norm_hermitian(diff);
    return {norm / static_cast<double>(dim), norm};
}

DistanceBounds channel_distance_bounds(const KrausChannel& a, const KrausChannel& b) {
    if (a.dim() != b.dim()) throw DimensionError("channel distance: dimension mismatch");
    return choi_distance_bounds(choi(a), choi(b), a.dim());
}

double monte_carlo_fluctuation_check(const PauliSum& generator, double sigma, int samples, std::uint64_t seed,
                                     double theta) {
    if (samples < 1) throw DomainError("samples must be positive");
    const KrausChannel analytic = compose(gaussian_fluctuation_channel(generator, sigma),
                                          unitary_channel(generator, theta));
    const CMatrix x = generator.realize();
    const auto d = x.rows();
    const CMatrix id = CMatrix::Identity(d, d);
    CMatrix empirical = CMatrix::Zero(d * d, d * d);
    CVector v(d * d);
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        const double angle = rng.normal(theta, sigma);
        const CMatrix u = std::cos(angle) * id + cplx(0, -std::sin(angle)) * x;
        for (Eigen::Index i = 0; i < d; ++i) v.segment(i * d, d) = u.col(i);
        empirical.noalias() += v * v.adjoint();
    }
    empirical /= static_cast<double>(samples);
    const double norm_d = static_cast<double>(d);
    return trace_distance(empirical / norm_d, choi(analytic) / norm_d);
}

}  // namespace nvqo
