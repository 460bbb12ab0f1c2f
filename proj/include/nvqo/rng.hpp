#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nvqo {

/// Mixes (master, stream) into an independent seed (SplitMix64 finaliser).
/// Parallel trials and gradient components use derive_seed(seed, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) built from the top 53 bits, identical on every platform.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

/// Inverse-CDF sampler over a finite probability vector.
class DiscreteSampler {
  public:
    explicit DiscreteSampler(std::span<const double> probabilities);

    std::size_t operator()(Rng& rng) const;
    std::size_t size() const { return cumulative_.size(); }

  private:
    std::vector<double> cumulative_;
    std::size_t last_positive_ = 0;
};

}  // namespace nvqo
