#include "nvqo/rng.hpp"

#include <algorithm>

#include "nvqo/error.hpp"

namespace nvqo {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

DiscreteSampler::DiscreteSampler(std::span<const double> probabilities) {
    if (probabilities.empty()) throw DomainError("empty probability vector");
    cumulative_.reserve(probabilities.size());
    double acc = 0.0;
    for (double p : probabilities) {
        if (p < 0.0) throw DomainError("negative probability");
        acc += p;
        cumulative_.push_back(acc);
    }
    if (!(acc > 0.0)) throw DomainError("probabilities sum to zero");
    for (double& c : cumulative_) c /= acc;
    last_positive_ = 0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        if (probabilities[k] > 0.0) last_positive_ = k;
    }
}

std::size_t DiscreteSampler::operator()(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto k = static_cast<std::size_t>(it - cumulative_.begin());
    return std::min(k, last_positive_);
}

}  // namespace nvqo
