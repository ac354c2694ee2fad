// SPDX-License-Identifier: MIT
#include "pricing/confidence.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "pricing/errors.hpp"

namespace pricing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool member_within(double dist, double radius, double tol) {
    return dist <= radius * (1.0 + tol) + tol;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ellipsoids and the parameter box

Ellipsoid Ellipsoid::make(Vec center, Mat shape, double radius) {
    if (shape.rows() != center.size() || shape.cols() != center.size()) {
        throw InvalidInput("ellipsoid: shape does not match center");
    }
    if (!(radius >= 0.0)) throw InvalidInput("ellipsoid: negative radius");
    Ellipsoid e;
    e.center = std::move(center);
    e.shape = std::move(shape);
    e.radius = radius;
    return e;
}

Ellipsoid Ellipsoid::make_ball(Vec center, double radius) {
    if (!(radius >= 0.0)) throw InvalidInput("ellipsoid: negative radius");
    Ellipsoid e;
    const auto d = center.size();
    e.center = std::move(center);
    e.shape = Mat::Identity(d, d);
    e.radius = radius;
    e.ball = true;
    return e;
}

double Ellipsoid::distance(const Vec& theta) const {
    const Vec z = theta - center;
    if (ball) return z.norm();
    return std::sqrt(std::max(z.dot(shape * z), 0.0));
}

bool Ellipsoid::contains(const Vec& theta, double tol) const {
    if (std::isinf(radius)) return true;
    return member_within(distance(theta), radius, tol);
}

NormBox NormBox::from_spec(const ProblemSpec& spec) {
    return NormBox{spec.d1, spec.alpha_max, spec.beta_max};
}

bool NormBox::contains(const Vec& theta, double tol) const {
    return member_within(theta.head(d1).norm(), alpha_max, tol) &&
           member_within(theta.tail(theta.size() - d1).norm(), beta_max, tol);
}

Vec NormBox::project(const Vec& theta) const {
    Vec out = theta;
    const double na = theta.head(d1).norm();
    if (na > alpha_max) out.head(d1) *= alpha_max / na;
    const auto d2 = theta.size() - d1;
    const double nb = theta.tail(d2).norm();
    if (nb > beta_max) out.tail(d2) *= beta_max / nb;
    return out;
}

bool ConfidenceSet::contains(const Vec& theta, double tol) const {
    for (const auto& e : ellipsoids) {
        if (!e.contains(theta, tol)) return false;
    }
    return !box || box->contains(theta, tol);
}

// ---------------------------------------------------------------------------
// Radii

static double log_det_term(double t, const RadiusParams& rp) {
    const double d = static_cast<double>(rp.d);
    return d * std::log(1.0 + t * rp.L * rp.L / (d * rp.lam));
}

double radius_w_t(double t, const RadiusParams& rp) {
    return std::sqrt(rp.lam) * rp.param_bound +
           std::sqrt(2.0 * std::log(3.0 / rp.eps) + log_det_term(t, rp));
}

double radius_w_tN(double t, const RadiusParams& rp, double V, double lam_min_sig, double lam_max_sig) {
    const double log6 = 2.0 * std::log(6.0 / rp.eps);
    return rp.lam * rp.param_bound / std::sqrt(rp.lam + lam_min_sig) +
           lam_max_sig * V / std::sqrt(rp.lam + lam_max_sig) + std::sqrt(log6 + log_det_term(t, rp)) +
           rp.R * std::sqrt(static_cast<double>(rp.d)) + rp.R * std::sqrt(log6);
}

double radius_what_tN(double t, const RadiusParams& rp, double V, double lam_min_sig) {
    const double log6 = 2.0 * std::log(6.0 / rp.eps);
    const double root = std::sqrt(rp.lam + lam_min_sig);
    return rp.lam * rp.param_bound / (rp.lam + lam_min_sig) + V +
           std::sqrt(log6 + log_det_term(t, rp)) / root +
           (rp.R * std::sqrt(static_cast<double>(rp.d)) + rp.R * std::sqrt(log6)) / root;
}

double robust_test_width(const RadiusParams& rp, double lam_min_offline, double lam_min_test) {
    const double noise = rp.R * std::sqrt(static_cast<double>(rp.d)) +
                         rp.R * std::sqrt(2.0 * std::log(3.0 / rp.eps));
    auto half = [&](double lam_min) {
        return rp.lam * rp.param_bound / (rp.lam + lam_min) + noise / std::sqrt(rp.lam + lam_min);
    };
    return half(lam_min_offline) + half(lam_min_test);
}

// ---------------------------------------------------------------------------
// Optimistic values

namespace {

// ||c||_{shape^{-1}} for several c against one factorization.
class DualNorm {
public:
    explicit DualNorm(const Ellipsoid& e) : ball_(e.ball) {
        if (!ball_) {
            llt_.compute(e.shape);
            if (llt_.info() != Eigen::Success) {
                throw NumericError("linear_max: ellipsoid shape is not positive definite");
            }
        }
    }
    double squared(const Vec& c) const { return ball_ ? c.squaredNorm() : c.dot(llt_.solve(c)); }
    Vec solve(const Vec& c) const { return ball_ ? c : Vec(llt_.solve(c)); }

private:
    bool ball_;
    Eigen::LLT<Mat> llt_;
};

}  // namespace

double linear_max(const ConfidenceSet& set, const Vec& c) {
    if (set.ellipsoids.empty()) throw InvalidInput("linear_max: empty ellipsoid list");
    double best = kInf;
    for (const auto& e : set.ellipsoids) {
        if (e.center.size() != c.size()) throw InvalidInput("linear_max: dimension mismatch");
        if (std::isinf(e.radius)) continue;
        const DualNorm dn(e);
        const double v = e.center.dot(c) + e.radius * std::sqrt(std::max(dn.squared(c), 0.0));
        best = std::min(best, v);
    }
    return best;
}

PriceChoice price_ucb_max(const ConfidenceSet& set, const Context& ctx, const ProblemSpec& spec,
                          int grid_size) {
    if (grid_size < 2) throw InvalidInput("price_ucb_max: grid_size must be >= 2");
    if (set.ellipsoids.empty()) throw InvalidInput("price_ucb_max: empty ellipsoid list");
    const int d1 = static_cast<int>(ctx.x.size());
    const int d = d1 + static_cast<int>(ctx.y.size());

    // For c(p) = [p x; p^2 y]: center^T c = p a + p^2 b and
    // ||c||^2 = p^2 qa + 2 p^3 qb + p^4 qe.
    struct Coeffs {
        double a, b, qa, qb, qe, r;
    };
    std::vector<Coeffs> coeffs;
    coeffs.reserve(set.ellipsoids.size());
    Vec ex = Vec::Zero(d);
    Vec ey = Vec::Zero(d);
    ex.head(d1) = ctx.x;
    ey.tail(d - d1) = ctx.y;
    for (const auto& e : set.ellipsoids) {
        if (e.dim() != d) throw InvalidInput("price_ucb_max: dimension mismatch");
        if (std::isinf(e.radius)) continue;
        const DualNorm dn(e);
        const Vec sx = dn.solve(ex);
        const Vec sy = dn.solve(ey);
        coeffs.push_back({e.center.head(d1).dot(ctx.x), e.center.tail(d - d1).dot(ctx.y), ex.dot(sx),
                          ex.dot(sy), ey.dot(sy), e.radius});
    }

    const double l = spec.price_low();
    const double u = spec.price_high();
    PriceChoice best{l, -kInf};
    for (int k = 0; k < grid_size; ++k) {
        const double p = l + (u - l) * static_cast<double>(k) / static_cast<double>(grid_size - 1);
        const double p2 = p * p;
        double value = kInf;
        for (const Coeffs& c : coeffs) {
            const double q = p2 * c.qa + 2.0 * p2 * p * c.qb + p2 * p2 * c.qe;
            value = std::min(value, p * c.a + p2 * c.b + c.r * std::sqrt(std::max(q, 0.0)));
        }
        if (value > best.ucb) best = {p, value};
    }
    return best;
}

// ---------------------------------------------------------------------------
// Projections

namespace {

// Euclidean projection onto one ellipsoid with a cached eigendecomposition.
class EllipsoidProjector {
public:
    explicit EllipsoidProjector(const Ellipsoid& e) : e_(e) {}

    Vec operator()(const Vec& theta) {
        if (std::isinf(e_.radius)) return theta;
        const Vec z = theta - e_.center;
        if (e_.ball) {
            const double n = z.norm();
            if (n <= e_.radius) return theta;
            return e_.center + z * (e_.radius / n);
        }
        const double q = z.dot(e_.shape * z);
        if (q <= e_.radius * e_.radius) return theta;
        if (e_.radius == 0.0) return e_.center;
        ensure_eigen();
        const Vec w = basis_.transpose() * z;
        // Find mu >= 0 with sum_i lam_i w_i^2 / (1 + mu lam_i)^2 = r^2; the
        // left side decreases in mu.
        const double r2 = e_.radius * e_.radius;
        auto g = [&](double mu) {
            double s = 0.0;
            for (int i = 0; i < w.size(); ++i) {
                const double den = 1.0 + mu * eig_[i];
                s += eig_[i] * w[i] * w[i] / (den * den);
            }
            return s;
        };
        double lo = 0.0;
        double hi = 1.0;
        while (g(hi) > r2 && hi < 1e300) hi *= 4.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
            if (g(mid) > r2) {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo <= 1e-15 * hi) break;
        }
        Vec scaled(w.size());
        for (int i = 0; i < w.size(); ++i) scaled[i] = w[i] / (1.0 + hi * eig_[i]);
        Vec out = e_.center + basis_ * scaled;
        // Pull back onto the surface if rounding left the point outside.
        const double dist = e_.distance(out);
        if (dist > e_.radius) out = e_.center + (out - e_.center) * (e_.radius / dist);
        return out;
    }

private:
    void ensure_eigen() {
        if (have_eigen_) return;
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (e_.shape + e_.shape.transpose()));
        if (es.info() != Eigen::Success) throw NumericError("projection: eigensolver failed");
        eig_ = es.eigenvalues().cwiseMax(0.0);
        basis_ = es.eigenvectors();
        have_eigen_ = true;
    }

    const Ellipsoid& e_;
    bool have_eigen_ = false;
    Vec eig_;
    Mat basis_;
};

// Projections onto every constraint of a set, indexed 0..n-1 with the box last.
class SetProjector {
public:
    explicit SetProjector(const ConfidenceSet& set) : set_(set) {
        projectors_.reserve(set.ellipsoids.size());
        for (const auto& e : set.ellipsoids) projectors_.emplace_back(e);
    }

    int count() const { return static_cast<int>(projectors_.size()) + (set_.box ? 1 : 0); }

    Vec project(int k, const Vec& theta) {
        if (k < static_cast<int>(projectors_.size())) return projectors_[k](theta);
        return set_.box->project(theta);
    }

    // Cyclic projections; returns the last iterate.
    Vec alternate(Vec theta, int max_cycles) {
        for (int cycle = 0; cycle < max_cycles; ++cycle) {
            if (set_.contains(theta, 1e-10)) return theta;
            const Vec before = theta;
            for (int k = 0; k < count(); ++k) theta = project(k, theta);
            if ((theta - before).norm() <= 1e-15 * (1.0 + theta.norm())) break;
        }
        return theta;
    }

    // Dykstra's algorithm: Euclidean projection onto the intersection.
    Vec dykstra(const Vec& theta, int max_cycles) {
        const int n = count();
        std::vector<Vec> incr(n, Vec::Zero(theta.size()));
        Vec x = theta;
        for (int cycle = 0; cycle < max_cycles; ++cycle) {
            const Vec before = x;
            for (int k = 0; k < n; ++k) {
                const Vec shifted = x + incr[k];
                const Vec y = project(k, shifted);
                incr[k] = shifted - y;
                x = y;
            }
            if ((x - before).norm() <= 1e-13 * (1.0 + x.norm())) break;
        }
        return x;
    }

private:
    const ConfidenceSet& set_;
    std::vector<EllipsoidProjector> projectors_;
};

// Uniform point in the parameter box (or a cube around the first center).
Vec random_start(const ConfidenceSet& set, CounterRng& rng) {
    const int d = set.dim();
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    if (set.box) {
        const NormBox& b = *set.box;
        Vec out = v;
        const int d2 = d - b.d1;
        const double ra = b.alpha_max * std::pow(rng.uniform(), 1.0 / b.d1);
        const double rb = b.beta_max * std::pow(rng.uniform(), 1.0 / d2);
        out.head(b.d1) = v.head(b.d1).normalized() * ra;
        out.tail(d2) = v.tail(d2).normalized() * rb;
        return out;
    }
    const Ellipsoid& e = set.ellipsoids.front();
    const double r = std::isinf(e.radius) ? 1.0 : e.radius;
    return e.center + v.normalized() * r * rng.uniform();
}

}  // namespace

Vec project_onto(const Ellipsoid& e, const Vec& theta) {
    EllipsoidProjector proj(e);
    return proj(theta);
}

std::optional<Vec> feasible_point(const ConfidenceSet& set, int restarts, CounterRng rng) {
    if (set.ellipsoids.empty() && !set.box) return std::nullopt;
    std::vector<Vec> starts;
    for (const auto& e : set.ellipsoids) starts.push_back(e.center);
    if (set.box && !set.ellipsoids.empty()) starts.push_back(set.box->project(set.ellipsoids.front().center));
    // Cheap acceptance: an existing center already inside everything.
    for (const Vec& s : starts) {
        if (set.contains(s, 1e-10)) return s;
    }
    SetProjector proj(set);
    for (int k = 0; k < std::max(restarts, 1); ++k) {
        const Vec start = k < static_cast<int>(starts.size()) ? starts[k] : random_start(set, rng);
        const Vec x = proj.alternate(start, 1000);
        if (set.contains(x, 1e-10)) return x;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Offline price fit

PriceFitObjective::PriceFitObjective(const std::vector<Context>& contexts,
                                     const std::vector<double>& phat_values) {
    if (contexts.size() != phat_values.size()) {
        throw InvalidInput("price fit: contexts and offline prices differ in length");
    }
    if (contexts.empty()) throw InvalidInput("price fit: no offline contexts");
    d1_ = static_cast<int>(contexts.front().x.size());
    s1_ = Vec::Zero(d1_);
    zz_ = Mat::Zero(d1_, d1_);
    for (std::size_t n = 0; n < contexts.size(); ++n) {
        const Context& c = contexts[n];
        if (c.y.size() != 1) throw UnsupportedDimension("price fit: scalar elasticity feature required");
        if (c.x.size() != d1_) throw InvalidInput("price fit: dimension mismatch");
        const Vec z = c.x / c.y[0];
        s0_ += phat_values[n] * phat_values[n];
        s1_ += phat_values[n] * z;
        zz_.noalias() += z * z.transpose();
    }
}

// sum (phat + alpha^T z / (2 beta))^2 = s0 + alpha^T s1 / beta + alpha^T Z alpha / (4 beta^2)
double PriceFitObjective::value(const Vec& theta) const {
    const double beta = theta[d1_];
    if (!(beta < 0.0)) return kInf;
    const Vec alpha = theta.head(d1_);
    const double v = s0_ + alpha.dot(s1_) / beta + alpha.dot(zz_ * alpha) / (4.0 * beta * beta);
    return std::max(v, 0.0);
}

Vec PriceFitObjective::gradient(const Vec& theta) const {
    const double beta = theta[d1_];
    const Vec alpha = theta.head(d1_);
    const Vec za = zz_ * alpha;
    Vec g(d1_ + 1);
    g.head(d1_) = s1_ / beta + za / (2.0 * beta * beta);
    g[d1_] = -alpha.dot(s1_) / (beta * beta) - alpha.dot(za) / (2.0 * beta * beta * beta);
    return g;
}

std::optional<double> min_price_fit(const ConfidenceSet& set, const PriceFitObjective& objective,
                                    const FitOptions& options, CounterRng rng) {
    if (set.dim() != objective.d1() + 1) {
        throw UnsupportedDimension("min_price_fit: scalar elasticity feature required");
    }
    SetProjector proj(set);
    std::vector<Vec> starts;
    starts.push_back(set.ellipsoids.front().center);
    if (set.box) starts.push_back(set.box->project(set.ellipsoids.front().center));

    std::optional<double> best;
    const int n_starts = std::max(options.restarts, 1);
    for (int k = 0; k < n_starts; ++k) {
        const Vec raw = k < static_cast<int>(starts.size()) ? starts[k] : random_start(set, rng);
        Vec x = proj.dykstra(raw, 500);
        if (!set.contains(x, 1e-9)) continue;
        double fx = objective.value(x);
        if (!std::isfinite(fx)) {
            // A feasible point with beta >= 0 has no interior optimal price.
            if (!best) best = kInf;
            continue;
        }
        double step = 1.0;
        for (int it = 0; it < options.max_iterations; ++it) {
            const Vec g = objective.gradient(x);
            bool moved = false;
            Vec next;
            double fnext = kInf;
            step = std::min(step * 2.0, 1e12);
            // Backtracking on the projected-gradient sufficient-decrease condition.
            for (int bt = 0; bt < 60; ++bt) {
                next = proj.dykstra(x - step * g, 200);
                const Vec delta = next - x;
                fnext = objective.value(next);
                if (fnext <= fx + g.dot(delta) + delta.squaredNorm() / (2.0 * step)) {
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved || !set.contains(next, 1e-9)) break;
            const double improvement = fx - fnext;
            x = next;
            fx = fnext;
            if (improvement < options.tolerance) break;
        }
        if (!best || fx < *best) best = fx;
    }
    return best;
}

std::optional<double> min_price_fit(const ConfidenceSet& set, const std::vector<Context>& offline_contexts,
                                    const std::vector<double>& phat_values, const ProblemSpec& spec,
                                    const FitOptions& options, CounterRng rng) {
    if (spec.d2 != 1) throw UnsupportedDimension("min_price_fit: scalar elasticity feature required");
    return min_price_fit(set, PriceFitObjective(offline_contexts, phat_values), options, rng);
}

// ---------------------------------------------------------------------------
// Set builders

ConfidenceSet co3_set(const GramState& online, const GramState& combined, const RadiusParams& rp,
                      double V, const OfflineSpectrum& offline, const std::optional<NormBox>& box) {
    ConfidenceSet set = gco3_set(online, combined, rp, V, offline, box);
    const double t = static_cast<double>(online.t);
    set.ellipsoids.insert(set.ellipsoids.begin(),
                          Ellipsoid::make(set.ellipsoids.front().center, combined.sigma,
                                          radius_w_tN(t, rp, V, offline.lam_min, offline.lam_max)));
    return set;
}

ConfidenceSet gco3_set(const GramState& online, const GramState& combined, const RadiusParams& rp,
                       double V, const OfflineSpectrum& offline, const std::optional<NormBox>& box) {
    if (online.t != combined.t) throw InvalidInput("confidence set: Gram states out of step");
    const double t = static_cast<double>(online.t);
    ConfidenceSet set;
    set.ellipsoids.push_back(
        Ellipsoid::make_ball(ridge_solve_vec(combined), radius_what_tN(t, rp, V, offline.lam_min)));
    set.ellipsoids.push_back(Ellipsoid::make(ridge_solve_vec(online), online.sigma, radius_w_t(t, rp)));
    set.box = box;
    return set;
}

ConfidenceSet combined_set(const GramState& combined, const RadiusParams& rp, double V,
                           const OfflineSpectrum& offline, const std::optional<NormBox>& box) {
    const double t = static_cast<double>(combined.t);
    ConfidenceSet set;
    set.ellipsoids.push_back(Ellipsoid::make(ridge_solve_vec(combined), combined.sigma,
                                             radius_w_tN(t, rp, V, offline.lam_min, offline.lam_max)));
    set.box = box;
    return set;
}

ConfidenceSet online_set(const GramState& online, const RadiusParams& rp, const std::optional<NormBox>& box) {
    ConfidenceSet set;
    set.ellipsoids.push_back(
        Ellipsoid::make(ridge_solve_vec(online), online.sigma, radius_w_t(static_cast<double>(online.t), rp)));
    set.box = box;
    return set;
}

}  // namespace pricing
