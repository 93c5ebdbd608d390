#include "procsim/stochastic.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>

namespace procsim {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key_a, std::uint64_t key_b) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s = h ^ (key_a * 0xd1b54a32d192ed03ULL);
    h = splitmix64(s);
    s = h ^ (key_b * 0x8cb92ba72f3d8dd7ULL);
    return splitmix64(s);
}

std::uint64_t parse_seed(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty seed");
    std::size_t used = 0;
    std::uint64_t value = 0;
    bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
    if (!hex && text[0] == '-') throw std::invalid_argument("negative seed: " + text);
    value = std::stoull(hex ? text.substr(2) : text, &used, hex ? 16 : 10);
    if (used != (hex ? text.size() - 2 : text.size())) throw std::invalid_argument("malformed seed: " + text);
    return value;
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

RandomStream::RandomStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t RandomStream::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double RandomStream::uniform_open() {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
}

double RandomStream::normal() {
    // Marsaglia polar method; the second variate is discarded so that every
    // call consumes a self-contained block of draws.
    for (;;) {
        double u = 2.0 * uniform() - 1.0;
        double v = 2.0 * uniform() - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

double RandomStream::exponential(double rate) {
    if (!(rate > 0.0)) throw ContractViolation("exponential: rate must be positive");
    return -std::log(uniform_open()) / rate;
}

bool RandomStream::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("bernoulli: p outside [0, 1]");
    return uniform() < p;
}

RandomStream& RandomSource::stream(StreamPurpose purpose, std::uint64_t entity) {
    auto key = std::make_pair(static_cast<std::uint32_t>(purpose), entity);
    auto it = streams_.find(key);
    if (it == streams_.end()) {
        it = streams_.emplace(key, RandomStream(derive_seed(master_, key.first, entity))).first;
    }
    return it->second;
}

// --- samplers ----------------------------------------------------------------

double sample_gamma(double shape, double scale, RandomStream& rng) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw ContractViolation("gamma: shape and scale must be positive");
    if (shape < 1.0) {
        // Boost to shape + 1, then scale back with U^(1/shape).
        double g = sample_gamma(shape + 1.0, 1.0, rng);
        double u = rng.uniform_open();
        double x = g * std::pow(u, 1.0 / shape);
        // Keep the support strictly positive under underflow.
        return std::max(x, std::numeric_limits<double>::min()) * scale;
    }
    // Marsaglia and Tsang (2000).
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z = rng.normal();
        double v = 1.0 + c * z;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = rng.uniform_open();
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v * scale;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

double sample_gamma_mean_one(double variance, RandomStream& rng) {
    if (!(variance > 0.0)) throw ContractViolation("gamma_mean_one: variance must be positive");
    return sample_gamma(1.0 / variance, variance, rng);
}

namespace {

long poisson_inversion(double mean, RandomStream& rng) {
    double p = std::exp(-mean);
    double cdf = p;
    double u = rng.uniform();
    long k = 0;
    while (u > cdf && k < 10000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
        if (p == 0.0 && cdf < u) break;  // rounding tail; u is within 1 ulp of 1
    }
    return k;
}

// Hörmann's transformed rejection with squeeze (PTRS), for mean >= 10.
long poisson_ptrs(double mean, RandomStream& rng) {
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform_open();
        double us = 0.5 - std::fabs(u);
        auto k = static_cast<long>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
        double rhs = -mean + static_cast<double>(k) * log_mean - std::lgamma(static_cast<double>(k) + 1.0);
        if (lhs <= rhs) return k;
    }
}

}  // namespace

long sample_poisson(double mean, RandomStream& rng) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw ContractViolation("poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    return mean < 10.0 ? poisson_inversion(mean, rng) : poisson_ptrs(mean, rng);
}

long sample_negbin(double mean, double dispersion, RandomStream& rng) {
    if (!(mean >= 0.0)) throw ContractViolation("negbin: mean must be >= 0");
    if (!(dispersion > 0.0)) throw ContractViolation("negbin: dispersion must be positive");
    double frailty = sample_gamma_mean_one(dispersion, rng);
    return sample_poisson(frailty * mean, rng);
}

std::size_t sample_categorical(std::span<const double> probs, RandomStream& rng) {
    if (probs.empty()) throw ContractViolation("categorical: empty probability vector");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw ContractViolation("categorical: negative or NaN probability");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw ContractViolation("categorical: probabilities do not sum to 1");
    double u = rng.uniform() * total;
    double cdf = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = i;
        cdf += probs[i];
        if (u < cdf) return i;
    }
    return last_positive;
}

double sample_uniform(double a, double b, RandomStream& rng) {
    if (!(a < b)) throw ContractViolation("uniform: requires a < b");
    return a + (b - a) * rng.uniform();
}

GaussianFactor::GaussianFactor(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) throw ContractViolation("mvnormal: covariance is not square");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw ContractViolation("mvnormal: covariance is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
        return;
    }
    // Semi-definite: pivoted LDL^T, zero pivots drop out of the factor.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    Eigen::VectorXd d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] < -kCholeskyJitter * scale) {
            throw ContractViolation("mvnormal: covariance is not positive semi-definite (pivot " +
                                    std::to_string(d[i]) + ")");
        }
        d[i] = d[i] <= kCholeskyJitter * scale ? 0.0 : std::sqrt(d[i]);
    }
    Eigen::MatrixXd l = ldlt.matrixL();
    Eigen::MatrixXd ld = l * d.asDiagonal();
    factor_ = ldlt.transpositionsP().transpose() * ld;
}

Eigen::VectorXd GaussianFactor::sample(const Eigen::VectorXd& mean, RandomStream& rng) const {
    if (mean.size() != factor_.rows()) throw ContractViolation("mvnormal: mean/covariance size mismatch");
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + factor_ * z;
}

Eigen::VectorXd sample_mvnormal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RandomStream& rng) {
    return GaussianFactor(cov).sample(mean, rng);
}

}  // namespace procsim
