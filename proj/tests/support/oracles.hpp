#pragma once

#include "procsim/core.hpp"
#include "procsim/outcome.hpp"
#include "procsim/stochastic.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <vector>

namespace testoracle {

struct GridMoments {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

/// Posterior moments of a two-coefficient Gaussian regression by brute-force
/// quadrature of prior x likelihood over a square grid.
inline GridMoments grid_posterior(const Eigen::Vector2d& prior_mean, const Eigen::Matrix2d& prior_cov,
                                  const Eigen::MatrixX2d& design, const Eigen::VectorXd& response,
                                  double noise_variance, double half_width, int points) {
    const Eigen::Matrix2d prior_prec = prior_cov.inverse();
    const double step = 2.0 * half_width / (points - 1);
    std::vector<double> logp(static_cast<std::size_t>(points) * points);
    double peak = -1e300;
    for (int i = 0; i < points; ++i) {
        for (int j = 0; j < points; ++j) {
            const Eigen::Vector2d b(-half_width + i * step, -half_width + j * step);
            const Eigen::Vector2d d = b - prior_mean;
            double lp = -0.5 * d.dot(prior_prec * d);
            for (Eigen::Index n = 0; n < design.rows(); ++n) {
                const double r = response[n] - design.row(n).dot(b);
                lp -= 0.5 * r * r / noise_variance;
            }
            logp[static_cast<std::size_t>(i) * points + j] = lp;
            peak = std::max(peak, lp);
        }
    }
    double z = 0.0;
    Eigen::Vector2d m1 = Eigen::Vector2d::Zero();
    Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
    for (int i = 0; i < points; ++i) {
        for (int j = 0; j < points; ++j) {
            const Eigen::Vector2d b(-half_width + i * step, -half_width + j * step);
            const double w = std::exp(logp[static_cast<std::size_t>(i) * points + j] - peak);
            z += w;
            m1 += w * b;
            m2 += w * b * b.transpose();
        }
    }
    GridMoments out;
    out.mean = m1 / z;
    out.cov = m2 / z - out.mean * out.mean.transpose();
    return out;
}

struct StationarityCheck {
    procsim::Vec3 empirical = procsim::Vec3::Zero();
    procsim::Vec3 analytic = procsim::Vec3::Zero();
    procsim::Vec3 standard_error = procsim::Vec3::Zero();
    double worst_z = 0.0;
};

/// Feeds one order of `quantity` units per day to pair (product, supplier)
/// for `days` days through sample_outcome. The analytic reference is the
/// expected path, obtained by running the same recursion without noise and
/// with the deterministic allocation volumes. Standard errors use batch means.
inline StationarityCheck var_stationarity(const procsim::OutcomeModel& model, procsim::ProductId product,
                                          procsim::SupplierId supplier, int days, int quantity,
                                          std::uint64_t seed, int batches = 50) {
    using namespace procsim;
    HistoryLedger ledger(1, model.n_products(), model.n_suppliers());
    RandomStream rng(seed);
    const auto& q = model.pair(product, supplier);
    Vec3 m1 = q.intercept;
    Vec3 m2 = q.intercept;
    std::vector<Vec3> ys;
    std::vector<Vec3> ms;
    ys.reserve(static_cast<std::size_t>(days));
    for (int day = 1; day <= days; ++day) {
        auto s = sample_outcome(model, product, supplier, day, ledger, rng);
        ys.push_back(s.outcome.as_vector());

        const double prior_days = day - 1;
        const double v_short = quantity * std::min<double>(prior_days, model.short_window);
        const double v_long = quantity * std::min<double>(prior_days, model.long_window);
        const auto& h = model.harmonic;
        const double season = h.amplitude * std::sin(2.0 * std::numbers::pi * day / h.period + h.phase);
        const Vec3 m = q.intercept + q.ar1 * m1 + q.ar2 * m2 + q.short_allocation * v_short +
                       q.long_allocation * v_long + q.harmonic_loading * season;
        ms.push_back(m);
        m2 = m1;
        m1 = m;

        OrderEntry o;
        o.day = day;
        o.ref.site = SiteId(1);
        o.ref.product = product;
        o.ref.quantity = quantity;
        o.ref.event_time = day - 0.5;
        o.supplier = supplier;
        o.outcome = s.outcome;
        o.noise = s.noise;
        ledger.append_order(o);
    }

    StationarityCheck out;
    const auto n = static_cast<double>(days);
    for (int d = 0; d < days; ++d) {
        out.empirical += ys[static_cast<std::size_t>(d)] / n;
        out.analytic += ms[static_cast<std::size_t>(d)] / n;
    }
    const int per = days / batches;
    std::vector<Vec3> batch_means;
    for (int b = 0; b < batches; ++b) {
        Vec3 s = Vec3::Zero();
        for (int d = b * per; d < (b + 1) * per; ++d) s += ys[static_cast<std::size_t>(d)] - ms[static_cast<std::size_t>(d)];
        batch_means.push_back(s / per);
    }
    Vec3 mu = Vec3::Zero();
    for (const auto& b : batch_means) mu += b / batches;
    Vec3 var = Vec3::Zero();
    for (const auto& b : batch_means) var += (b - mu).cwiseProduct(b - mu) / (batches - 1);
    out.standard_error = (var / batches).cwiseSqrt();
    out.worst_z = ((out.empirical - out.analytic).cwiseAbs().cwiseQuotient(out.standard_error)).maxCoeff();
    return out;
}

}  // namespace testoracle
