#include "nvqo/pauli.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "nvqo/error.hpp"
#include "nvqo/kernels.hpp"

namespace nvqo {
namespace {

std::atomic<int> g_qubit_cap{kDefaultQubitCap};

Pauli from_char(char c) {
    switch (c) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
        default: throw DomainError(std::string("invalid Pauli letter '") + c + "'");
    }
}

// i^k for k mod 4
cplx ipow(int k) {
    switch (k & 3) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

inline bool odd_parity(std::size_t v) { return (std::popcount(v) & 1) != 0; }

}  // namespace

int qubit_cap() { return g_qubit_cap.load(); }

void set_qubit_cap(int cap) {
    if (cap < 1 || cap > 30) throw DomainError("qubit cap must lie in [1, 30]");
    g_qubit_cap.store(cap);
}

void check_qubit_cap(int nqubits) {
    if (nqubits < 1) throw DimensionError("register needs at least one qubit");
    if (nqubits > qubit_cap()) {
        throw DimensionError("register of " + std::to_string(nqubits) + " qubits exceeds the cap of " +
                             std::to_string(qubit_cap()));
    }
}

char to_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

PauliString::PauliString(std::vector<Pauli> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw DimensionError("Pauli string needs at least one qubit");
    if (axes_.size() > 62) throw DimensionError("Pauli string too long");
    const int n = nqubits();
    for (int q = 0; q < n; ++q) {
        const std::size_t bit = qubit_mask(n, q);
        switch (axes_[static_cast<std::size_t>(q)]) {
            case Pauli::I: break;
            case Pauli::X: flip_ |= bit; break;
            case Pauli::Y: flip_ |= bit; zmask_ |= bit; ++ycount_; break;
            case Pauli::Z: zmask_ |= bit; break;
        }
    }
}

PauliString PauliString::parse(std::string_view letters) {
    std::vector<Pauli> axes;
    axes.reserve(letters.size());
    for (char c : letters) axes.push_back(from_char(c));
    return PauliString(std::move(axes));
}

PauliString PauliString::identity(int nqubits) {
    return PauliString(std::vector<Pauli>(static_cast<std::size_t>(nqubits), Pauli::I));
}

PauliString PauliString::single(int nqubits, int qubit, Pauli p) {
    if (qubit < 0 || qubit >= nqubits) throw DimensionError("qubit index out of range");
    std::vector<Pauli> axes(static_cast<std::size_t>(nqubits), Pauli::I);
    axes[static_cast<std::size_t>(qubit)] = p;
    return PauliString(std::move(axes));
}

std::string PauliString::str() const {
    std::string s;
    s.reserve(axes_.size());
    for (Pauli p : axes_) s.push_back(to_char(p));
    return s;
}

int PauliString::weight() const {
    return static_cast<int>(std::count_if(axes_.begin(), axes_.end(), [](Pauli p) { return p != Pauli::I; }));
}

// Y = i X Z, so S|c> = i^{#Y} (-1)^{popcount(c & zmask)} |c ^ flip>.
cplx PauliString::phase(std::size_t c) const {
    const cplx base = ipow(ycount_);
    return odd_parity(c & zmask_) ? -base : base;
}

CMatrix PauliString::realize() const {
    check_qubit_cap(nqubits());
    const std::size_t d = dim_of(nqubits());
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < d; ++c) {
        m(static_cast<Eigen::Index>(c ^ flip_), static_cast<Eigen::Index>(c)) = phase(c);
    }
    return m;
}

PauliSum::PauliSum(int nqubits) : nqubits_(nqubits) {
    if (nqubits < 1) throw DimensionError("PauliSum needs at least one qubit");
}

PauliSum::PauliSum(int nqubits, std::vector<PauliTerm> terms) : nqubits_(nqubits), terms_(std::move(terms)) {
    if (nqubits < 1) throw DimensionError("PauliSum needs at least one qubit");
    for (const auto& t : terms_) {
        if (t.string.nqubits() != nqubits_) {
            throw DimensionError("Pauli string '" + t.string.str() + "' does not match register of " +
                                 std::to_string(nqubits_) + " qubits");
        }
        if (!std::isfinite(t.coefficient)) throw DomainError("non-finite Pauli coefficient");
    }
    canonicalize();
}

void PauliSum::canonicalize() {
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const PauliTerm& a, const PauliTerm& b) { return a.string < b.string; });
    std::vector<PauliTerm> merged;
    merged.reserve(terms_.size());
    for (auto& t : terms_) {
        if (!merged.empty() && merged.back().string == t.string) {
            merged.back().coefficient += t.coefficient;
        } else {
            merged.push_back(std::move(t));
        }
    }
    std::erase_if(merged, [](const PauliTerm& t) { return t.coefficient == 0.0; });
    terms_ = std::move(merged);
}

PauliSum PauliSum::parse(std::string_view text, int nqubits) {
    std::vector<PauliTerm> terms;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::string coef_text, letters, extra;
        fields >> coef_text >> letters;
        if (letters.empty() || (fields >> extra)) {
            throw ConfigError("Pauli sum line " + std::to_string(lineno) + ": expected '<coefficient> <letters>'");
        }
        double coef = 0.0;
        const auto [ptr, ec] = std::from_chars(coef_text.data(), coef_text.data() + coef_text.size(), coef);
        if (ec != std::errc{} || ptr != coef_text.data() + coef_text.size()) {
            throw ConfigError("Pauli sum line " + std::to_string(lineno) + ": bad coefficient '" + coef_text + "'");
        }
        try {
            terms.push_back({coef, PauliString::parse(letters)});
        } catch (const DomainError& e) {
            throw ConfigError("Pauli sum line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (nqubits < 0) {
        if (terms.empty()) throw ConfigError("cannot infer qubit count from an empty Pauli sum");
        nqubits = terms.front().string.nqubits();
    }
    try {
        return PauliSum(nqubits, std::move(terms));
    } catch (const DimensionError& e) {
        throw ConfigError(e.what());
    }
}

std::string PauliSum::to_text() const {
    std::ostringstream out;
    out << std::setprecision(17);
    for (const auto& t : terms_) out << t.coefficient << ' ' << t.string.str() << '\n';
    return out.str();
}

bool PauliSum::is_diagonal() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const PauliTerm& t) { return t.string.is_diagonal(); });
}

PauliSum PauliSum::operator+(const PauliSum& other) const {
    if (other.nqubits_ != nqubits_) throw DimensionError("adding Pauli sums of different sizes");
    std::vector<PauliTerm> all = terms_;
    all.insert(all.end(), other.terms_.begin(), other.terms_.end());
    return PauliSum(nqubits_, std::move(all));
}

PauliSum PauliSum::operator*(double scale) const {
    std::vector<PauliTerm> scaled = terms_;
    for (auto& t : scaled) t.coefficient *= scale;
    return PauliSum(nqubits_, std::move(scaled));
}

CMatrix PauliSum::realize() const {
    check_qubit_cap(nqubits_);
    const std::size_t d = dim_of(nqubits_);
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (const auto& t : terms_) {
        const std::size_t flip = t.string.flip_mask();
        for (std::size_t c = 0; c < d; ++c) {
            m(static_cast<Eigen::Index>(c ^ flip), static_cast<Eigen::Index>(c)) += t.coefficient * t.string.phase(c);
        }
    }
    return m;
}

RVector PauliSum::realize_diagonal() const {
    if (!is_diagonal()) throw DomainError("Pauli sum has off-diagonal strings");
    check_qubit_cap(nqubits_);
    const std::size_t d = dim_of(nqubits_);
    RVector diag = RVector::Zero(static_cast<Eigen::Index>(d));
    for (const auto& t : terms_) {
        for (std::size_t c = 0; c < d; ++c) diag[static_cast<Eigen::Index>(c)] += t.coefficient * t.string.phase(c).real();
    }
    return diag;
}

bool PauliSum::is_involutory(double tol) const {
    const CMatrix m = realize();
    const auto d = m.rows();
    return ((m * m) - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() <= tol;
}

RVector spectrum(const PauliSum& sum) {
    if (sum.is_diagonal()) {
        RVector diag = sum.realize_diagonal();
        std::sort(diag.data(), diag.data() + diag.size());
        return diag;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sum.realize(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues();
}

double op_norm_inf(const PauliSum& sum) {
    if (sum.empty()) return 0.0;
    const RVector ev = spectrum(sum);
    return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

double min_eigenvalue(const PauliSum& sum) { return spectrum(sum)[0]; }

double max_eigenvalue(const PauliSum& sum) {
    const RVector ev = spectrum(sum);
    return ev[ev.size() - 1];
}

CVector apply(const PauliString& s, const CVector& v) {
    const auto d = static_cast<std::size_t>(v.size());
    if (d != dim_of(s.nqubits())) throw DimensionError("Pauli string / vector size mismatch");
    CVector out(v.size());
    const std::size_t flip = s.flip_mask();
    for (std::size_t c = 0; c < d; ++c) {
        out[static_cast<Eigen::Index>(c ^ flip)] = s.phase(c) * v[static_cast<Eigen::Index>(c)];
    }
    return out;
}

void add_left_product(const PauliString& s, cplx coef, const CMatrix& x, CMatrix& out) {
    const auto d = static_cast<std::size_t>(x.rows());
    if (d != dim_of(s.nqubits()) || out.rows() != x.rows() || out.cols() != x.cols()) {
        throw DimensionError("Pauli product size mismatch");
    }
    const std::size_t flip = s.flip_mask();
    std::vector<cplx> row_phase(d);
    for (std::size_t a = 0; a < d; ++a) row_phase[a] = coef * s.phase(a ^ flip);
    for (std::size_t b = 0; b < d; ++b) {
        const cplx* xc = x.data() + b * d;
        cplx* oc = out.data() + b * d;
        for (std::size_t a = 0; a < d; ++a) oc[a] += row_phase[a] * xc[a ^ flip];
    }
}

void add_right_product(const PauliString& s, cplx coef, const CMatrix& x, CMatrix& out) {
    const auto d = static_cast<std::size_t>(x.rows());
    if (d != dim_of(s.nqubits()) || out.rows() != x.rows() || out.cols() != x.cols()) {
        throw DimensionError("Pauli product size mismatch");
    }
    const std::size_t flip = s.flip_mask();
    const auto& k = kernels::active();
    for (std::size_t b = 0; b < d; ++b) {
        k.axpy(coef * s.phase(b), x.data() + (b ^ flip) * d, out.data() + b * d, d);
    }
}

void add_conjugation(const PauliString& s, double coef, const CMatrix& x, CMatrix& out) {
    const auto d = static_cast<std::size_t>(x.rows());
    if (d != dim_of(s.nqubits()) || out.rows() != x.rows() || out.cols() != x.cols()) {
        throw DimensionError("Pauli conjugation size mismatch");
    }
    const std::size_t flip = s.flip_mask();
    const std::size_t zm = s.phase_mask();
    // (S X S)_{ab} = (-1)^{popcount((a^b) & zmask)} X_{a^flip, b^flip}
    for (std::size_t b = 0; b < d; ++b) {
        const cplx* xc = x.data() + (b ^ flip) * d;
        cplx* oc = out.data() + b * d;
        for (std::size_t a = 0; a < d; ++a) {
            const double sign = odd_parity((a ^ b) & zm) ? -coef : coef;
            oc[a] += sign * xc[a ^ flip];
        }
    }
}

CMatrix commutator_minus_i(const PauliSum& generator, const CMatrix& x, double scale) {
    CMatrix out = CMatrix::Zero(x.rows(), x.cols());
    const auto d = static_cast<std::size_t>(x.rows());
    if (generator.is_diagonal()) {
        // [D, X]_{ab} = (D_a - D_b) X_ab
        const RVector diag = generator.realize_diagonal();
        if (static_cast<std::size_t>(diag.size()) != d) throw DimensionError("generator / matrix size mismatch");
        for (std::size_t b = 0; b < d; ++b) {
            for (std::size_t a = 0; a < d; ++a) {
                out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    cplx(0, -scale * (diag[static_cast<Eigen::Index>(a)] - diag[static_cast<Eigen::Index>(b)])) *
                    x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }
        return out;
    }
    for (const auto& t : generator.terms()) {
        const cplx c(0, -scale * t.coefficient);
        add_left_product(t.string, c, x, out);
        add_right_product(t.string, -c, x, out);
    }
    return out;
}

}  // namespace nvqo
