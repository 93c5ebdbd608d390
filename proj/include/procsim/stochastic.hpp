#pragma once

#include "procsim/core.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>

namespace procsim {

/// xoshiro256** engine. Seeded through splitmix64 so that nearby seeds
/// still give unrelated states.
class RandomStream {
  public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next(); }
    result_type next();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1); safe as a log argument.
    double uniform_open();
    double normal();
    double exponential(double rate);
    bool bernoulli(double p);

  private:
    std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);
/// Mixes a key into a seed; used for replication seeds and substream keys.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key_a, std::uint64_t key_b = 0);
/// Accepts decimal or 0x-prefixed hexadecimal.
std::uint64_t parse_seed(const std::string& text);

enum class StreamPurpose : std::uint32_t {
    setup = 1,
    demand_timing = 2,
    requisition_content = 3,
    order_propensity = 4,
    outcome_noise = 5,
    policy_internal = 6,
    tie_break = 7,
};

/// Named substreams keyed by (purpose, entity). Each substream is a function
/// of (master seed, purpose, entity) only, so consuming draws from one never
/// shifts another.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t master_seed) : master_(master_seed) {}

    std::uint64_t master_seed() const { return master_; }
    RandomStream& stream(StreamPurpose purpose, std::uint64_t entity = 0);

  private:
    std::uint64_t master_;
    std::map<std::pair<std::uint32_t, std::uint64_t>, RandomStream> streams_;
};

// --- samplers ----------------------------------------------------------------

double sample_gamma(double shape, double scale, RandomStream& rng);
/// Gamma with mean 1 and variance phi: shape 1/phi, scale phi.
double sample_gamma_mean_one(double variance, RandomStream& rng);
long sample_poisson(double mean, RandomStream& rng);
/// Gamma-mixed Poisson: mean `mean`, variance mean + dispersion * mean^2.
long sample_negbin(double mean, double dispersion, RandomStream& rng);
std::size_t sample_categorical(std::span<const double> probs, RandomStream& rng);
double sample_uniform(double a, double b, RandomStream& rng);

/// Factorisation of a symmetric positive semi-definite covariance, reusable
/// across draws. Semi-definite directions (pivots within the jitter
/// tolerance of zero) contribute no noise; clearly indefinite input throws.
class GaussianFactor {
  public:
    explicit GaussianFactor(const Eigen::MatrixXd& covariance);

    Eigen::Index dim() const { return factor_.rows(); }
    /// mean + F z with z i.i.d. standard normal, F F^T = covariance.
    Eigen::VectorXd sample(const Eigen::VectorXd& mean, RandomStream& rng) const;
    const Eigen::MatrixXd& factor() const { return factor_; }

  private:
    Eigen::MatrixXd factor_;
};

inline constexpr double kCholeskyJitter = 1e-10;

Eigen::VectorXd sample_mvnormal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                RandomStream& rng);

}  // namespace procsim
