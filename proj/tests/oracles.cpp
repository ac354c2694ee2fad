// SPDX-License-Identifier: MIT
#include "oracles.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double grid_revenue_argmax(const pricing::DemandParams& theta, const pricing::Context& ctx,
                           const pricing::ProblemSpec& spec, int resolution) {
    const double l = spec.price_low();
    const double u = spec.price_high();
    const double a = theta.alpha.dot(ctx.x);
    const double b = theta.beta.dot(ctx.y);
    double best_p = l;
    double best_r = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < resolution; ++i) {
        const double p = l + (u - l) * i / (resolution - 1);
        const double r = p * (a + b * p);
        if (r > best_r) {
            best_r = r;
            best_p = p;
        }
    }
    return best_p;
}

std::optional<double> rejection_max_linear(const std::vector<pricing::Ellipsoid>& ellipsoids, const Vec& c,
                                           long samples, pricing::CounterRng rng) {
    const pricing::Ellipsoid& first = ellipsoids.front();
    const int d = first.dim();
    Vec half(d);
    if (first.ball) {
        half.setConstant(first.radius);
    } else {
        const Mat inv = first.shape.inverse();
        for (int i = 0; i < d; ++i) half[i] = first.radius * std::sqrt(inv(i, i));
    }
    std::optional<double> best;
    Vec theta(d);
    for (long s = 0; s < samples; ++s) {
        for (int i = 0; i < d; ++i) theta[i] = first.center[i] + half[i] * (2.0 * rng.uniform() - 1.0);
        bool inside = true;
        for (const auto& e : ellipsoids) {
            const Vec diff = theta - e.center;
            const double q = e.ball ? diff.squaredNorm() : diff.dot(e.shape * diff);
            if (q > e.radius * e.radius) {
                inside = false;
                break;
            }
        }
        if (!inside) continue;
        const double v = c.dot(theta);
        if (!best || v > *best) best = v;
    }
    return best;
}

double schur_min(const pricing::OfflineDataset& data) {
    const long n = data.size();
    const int d1 = data.d1;
    Mat X(n, d1);
    Vec target(n);
    for (long i = 0; i < n; ++i) {
        X.row(i) = data.rows[i].x.transpose();
        target[i] = -data.rows[i].y[0] * data.rows[i].p;
    }
    const Vec v = X.colPivHouseholderQr().solve(target);
    return (X * v - target).squaredNorm();
}

Vec ridge_lstsq(const std::vector<Vec>& features, const std::vector<double>& responses, double lam) {
    const int d = static_cast<int>(features.front().size());
    const long n = static_cast<long>(features.size());
    Mat A = Mat::Zero(n + d, d);
    Vec b = Vec::Zero(n + d);
    for (long i = 0; i < n; ++i) {
        A.row(i) = features[i].transpose();
        b[i] = responses[i];
    }
    A.bottomRows(d) = std::sqrt(lam) * Mat::Identity(d, d);
    return A.householderQr().solve(b);
}

double quadratic_regret(const pricing::DemandParams& theta, double p, const pricing::Context& ctx) {
    const double a = theta.alpha.dot(ctx.x);
    const double b = theta.beta.dot(ctx.y);
    const double star = -a / (2.0 * b);
    return -b * (p - star) * (p - star);
}

double dense_linear_max(const std::vector<pricing::Ellipsoid>& ellipsoids, const Vec& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : ellipsoids) {
        const Mat inv = e.ball ? Mat::Identity(e.dim(), e.dim()) : Mat(e.shape.inverse());
        best = std::min(best, e.center.dot(c) + e.radius * std::sqrt(c.dot(inv * c)));
    }
    return best;
}

}  // namespace oracle
