#include "procsim/stochastic.hpp"

#include "support/stats.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <doctest.h>

#include <cmath>
#include <map>

using namespace procsim;

TEST_CASE("streams are reproducible and isolated") {
    RandomSource a(7);
    RandomSource b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.stream(StreamPurpose::outcome_noise).next() == b.stream(StreamPurpose::outcome_noise).next());

    // Extra draws in one substream leave the others untouched.
    RandomSource c(11);
    RandomSource d(11);
    for (int i = 0; i < 37; ++i) c.stream(StreamPurpose::policy_internal).next();
    for (int i = 0; i < 50; ++i) {
        CHECK(c.stream(StreamPurpose::demand_timing, 3).next() == d.stream(StreamPurpose::demand_timing, 3).next());
    }

    RandomSource e(11);
    CHECK(e.stream(StreamPurpose::demand_timing, 1).next() != e.stream(StreamPurpose::demand_timing, 2).next());
}

TEST_CASE("seeds parse as decimal or hex") {
    CHECK(parse_seed("0") == 0);
    CHECK(parse_seed("12345") == 12345);
    CHECK(parse_seed("0xff") == 255);
    CHECK(parse_seed("0XFF") == 255);
    CHECK_THROWS(parse_seed("12a"));
    CHECK_THROWS(parse_seed(""));
}

TEST_CASE("uniform draws lie in [0, 1) and pass a KS test") {
    RandomStream rng(1);
    std::vector<double> v(100000);
    for (auto& x : v) {
        x = rng.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
    }
    CHECK(teststats::ks_pvalue(v, [](double x) { return x; }) > 0.01);
}

TEST_CASE("normal draws pass a KS test") {
    RandomStream rng(2);
    std::vector<double> v(100000);
    for (auto& x : v) x = rng.normal();
    CHECK(teststats::ks_pvalue(v, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }) > 0.01);
}

TEST_CASE("gamma with mean one") {
    RandomStream rng(3);
    std::vector<double> v(1000000);
    for (auto& x : v) x = sample_gamma_mean_one(0.25, rng);
    CHECK(teststats::mean(v) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::fabs(teststats::variance(v) - 0.25) < 0.01);
    CHECK(*std::min_element(v.begin(), v.end()) > 0.0);

    std::vector<double> tight(100000);
    for (auto& x : tight) x = sample_gamma_mean_one(0.001, rng);
    CHECK(std::sqrt(teststats::variance(tight)) == doctest::Approx(std::sqrt(0.001)).epsilon(0.02));

    CHECK_THROWS_AS(sample_gamma_mean_one(0.0, rng), ContractViolation);
    CHECK_THROWS_AS(sample_gamma_mean_one(-1.0, rng), ContractViolation);
}

TEST_CASE("gamma draws fit their law, including shape below one") {
    RandomStream rng(4);
    for (double shape : {0.3, 1.0, 4.0}) {
        std::vector<double> v(100000);
        for (auto& x : v) x = sample_gamma(shape, 2.0, rng);
        boost::math::gamma_distribution<double> law(shape, 2.0);
        CHECK(teststats::ks_pvalue(v, [&](double x) { return boost::math::cdf(law, x); }) > 0.01);
    }
}

TEST_CASE("exponential draws fit their law") {
    RandomStream rng(5);
    std::vector<double> v(100000);
    for (auto& x : v) x = rng.exponential(1.0 / 90.0);
    CHECK(teststats::ks_pvalue(v, [](double x) { return 1.0 - std::exp(-x / 90.0); }) > 0.01);
    CHECK_THROWS_AS(rng.exponential(0.0), ContractViolation);
}

namespace {

double poisson_pmf(long k, double mean) {
    return std::exp(-mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0));
}

/// Chi-square p-value of integer draws against a pmf, pooling the upper tail
/// so that every expected count is at least 5.
double count_gof(const std::vector<long>& draws, const std::function<double(long)>& pmf) {
    const auto n = static_cast<double>(draws.size());
    std::map<long, double> counts;
    for (long k : draws) counts[k] += 1.0;
    std::vector<double> obs;
    std::vector<double> expv;
    double cum_p = 0.0;
    long k = 0;
    for (;; ++k) {
        const double p = pmf(k);
        if (n * (1.0 - cum_p - p) < 5.0) break;
        obs.push_back(counts.count(k) ? counts[k] : 0.0);
        expv.push_back(n * p);
        cum_p += p;
    }
    double tail = 0.0;
    for (const auto& [key, c] : counts) {
        if (key >= k) tail += c;
    }
    obs.push_back(tail);
    expv.push_back(n * (1.0 - cum_p));
    return teststats::chi_square_gof(obs, expv);
}

}  // namespace

TEST_CASE("poisson draws fit their law on both sampler branches") {
    RandomStream rng(6);
    for (double mean : {0.5, 3.0, 25.0, 140.0}) {
        std::vector<long> v(100000);
        for (auto& k : v) k = sample_poisson(mean, rng);
        CHECK(count_gof(v, [&](long k) { return poisson_pmf(k, mean); }) > 0.01);
    }
    CHECK(sample_poisson(0.0, rng) == 0);
}

TEST_CASE("gamma-mixed poisson") {
    RandomStream rng(7);
    for (int i = 0; i < 1000; ++i) REQUIRE(sample_negbin(0.0, 1.0, rng) == 0);

    std::vector<double> v(1000000);
    for (auto& x : v) x = static_cast<double>(sample_negbin(0.5, 1.0, rng));
    CHECK(std::fabs(teststats::mean(v) - 0.5) < 0.005);
    CHECK(std::fabs(teststats::variance(v) - 0.75) < 0.01);

    std::vector<long> near_poisson(100000);
    for (auto& k : near_poisson) k = sample_negbin(0.5, 1e-6, rng);
    CHECK(count_gof(near_poisson, [](long k) { return poisson_pmf(k, 0.5); }) > 0.01);

    CHECK_THROWS_AS(sample_negbin(-1.0, 1.0, rng), ContractViolation);
    CHECK_THROWS_AS(sample_negbin(1.0, -1.0, rng), ContractViolation);
}

TEST_CASE("categorical sampling") {
    RandomStream rng(8);
    const double one[] = {1.0};
    CHECK(sample_categorical(one, rng) == 0);
    const double mid[] = {0.0, 1.0, 0.0};
    for (int i = 0; i < 1000; ++i) REQUIRE(sample_categorical(mid, rng) == 1);
    const double half[] = {0.5, 0.5};
    int zeros = 0;
    for (int i = 0; i < 100000; ++i) zeros += sample_categorical(half, rng) == 0;
    CHECK(std::fabs(zeros / 1e5 - 0.5) < 0.01);

    const double bad_sum[] = {0.5, 0.6};
    const double negative[] = {1.5, -0.5};
    CHECK_THROWS_AS(sample_categorical(bad_sum, rng), ContractViolation);
    CHECK_THROWS_AS(sample_categorical(negative, rng), ContractViolation);
}

TEST_CASE("multivariate normal") {
    RandomStream rng(9);
    Eigen::VectorXd mean(2);
    mean << 1.0, 2.0;
    auto exact = sample_mvnormal(mean, Eigen::MatrixXd::Zero(2, 2), rng);
    CHECK(exact[0] == 1.0);
    CHECK(exact[1] == 2.0);

    const int n = 100000;
    Eigen::MatrixXd cov(2, 2);
    cov << 4.0, 2.0, 2.0, 4.0;
    for (const Eigen::MatrixXd& target : {Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)), cov}) {
        Eigen::MatrixXd draws(n, 2);
        for (int i = 0; i < n; ++i) draws.row(i) = sample_mvnormal(Eigen::VectorXd::Zero(2), target, rng).transpose();
        const Eigen::RowVector2d m = draws.colwise().mean();
        const Eigen::MatrixXd centred = draws.rowwise() - m;
        const Eigen::Matrix2d emp = centred.transpose() * centred / (n - 1);
        const double tol_mean = 0.02 * std::sqrt(target.diagonal().maxCoeff());
        CHECK(std::fabs(m[0]) < tol_mean);
        CHECK(std::fabs(m[1]) < tol_mean);
        const double tol_cov = target(0, 1) == 0.0 ? 0.02 : 0.05 * 4.0;
        CHECK((emp - target).cwiseAbs().maxCoeff() < tol_cov);
    }

    // Semi-definite: a rank-one covariance only moves along its range.
    Eigen::MatrixXd rank1(2, 2);
    rank1 << 1.0, 1.0, 1.0, 1.0;
    for (int i = 0; i < 100; ++i) {
        auto x = sample_mvnormal(Eigen::VectorXd::Zero(2), rank1, rng);
        REQUIRE(std::fabs(x[0] - x[1]) < 1e-6);
    }

    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(sample_mvnormal(Eigen::VectorXd::Zero(2), indefinite, rng), ContractViolation);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(sample_mvnormal(Eigen::VectorXd::Zero(2), asym, rng), ContractViolation);
}
