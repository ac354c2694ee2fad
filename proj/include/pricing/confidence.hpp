// SPDX-License-Identifier: MIT
//
// Confidence radii, ellipsoid-intersection confidence sets, optimistic
// values over them, and the offline-fit minimization used by CO3's test.
#pragma once

#include <optional>
#include <vector>

#include "pricing/estimation.hpp"
#include "pricing/model.hpp"
#include "pricing/random.hpp"

namespace pricing {

// {theta : ||theta - center||_shape <= radius}. A ball uses the identity
// shape and sets `ball` so that no factorization is needed.
struct Ellipsoid {
    Vec center;
    Mat shape;
    double radius = 0.0;
    bool ball = false;

    static Ellipsoid make(Vec center, Mat shape, double radius);
    static Ellipsoid make_ball(Vec center, double radius);

    int dim() const { return static_cast<int>(center.size()); }
    // ||theta - center||_shape
    double distance(const Vec& theta) const;
    bool contains(const Vec& theta, double tol = 1e-9) const;
};

// The parameter set realized as ||alpha|| <= alpha_max, ||beta|| <= beta_max.
struct NormBox {
    int d1 = 0;
    double alpha_max = 0.0;
    double beta_max = 0.0;

    static NormBox from_spec(const ProblemSpec& spec);
    bool contains(const Vec& theta, double tol = 1e-9) const;
    Vec project(const Vec& theta) const;
};

struct ConfidenceSet {
    std::vector<Ellipsoid> ellipsoids;
    std::optional<NormBox> box;

    bool contains(const Vec& theta, double tol = 1e-9) const;
    int dim() const { return ellipsoids.empty() ? 0 : ellipsoids.front().dim(); }
};

// Inputs shared by every radius formula.
struct RadiusParams {
    double lam = 1.0;
    double eps = 1e-6;
    int d = 1;
    double L = 1.0;            // feature-norm bound
    double param_bound = 1.0;  // sqrt(alpha_max^2 + beta_max^2)
    double R = 0.0;            // noise scale
};

// sqrt(lam) S + sqrt(2 log(3/eps) + d log(1 + t L^2 / (d lam)))
double radius_w_t(double t, const RadiusParams& rp);
// Combined online+offline ellipsoid radius; four summands.
double radius_w_tN(double t, const RadiusParams& rp, double V, double lam_min_sig, double lam_max_sig);
// Euclidean radius around the combined estimate.
double radius_what_tN(double t, const RadiusParams& rp, double V, double lam_min_sig);
// Deviation bound between the offline and test-phase estimates' distance
// and the true bias; RCO3 compares the estimated bias against 2 f.
double robust_test_width(const RadiusParams& rp, double lam_min_offline, double lam_min_test);

// Upper bound of c^T theta over the set: min over ellipsoids of
// center^T c + radius ||c||_{shape^{-1}}. Exact for a single ellipsoid.
// The box is ignored. Throws InvalidInput on an empty list.
double linear_max(const ConfidenceSet& set, const Vec& c);

struct PriceChoice {
    double price = 0.0;
    double ucb = 0.0;
};

// Grid argmax over [l, u] of linear_max(set, [p x; p^2 y]); ties go to the
// smaller price.
PriceChoice price_ucb_max(const ConfidenceSet& set, const Context& ctx, const ProblemSpec& spec,
                          int grid_size);

// Euclidean projection onto one ellipsoid.
Vec project_onto(const Ellipsoid& e, const Vec& theta);

// A point of the intersection (ellipsoids and box) found by cyclic
// projections, or nothing when none is found within the iteration budget.
std::optional<Vec> feasible_point(const ConfidenceSet& set, int restarts, CounterRng rng);

// sum_n (phat_n - p*_theta(x_n, y_n))^2 with p*_theta = -alpha^T x / (2 beta y),
// held as sufficient statistics of z_n = x_n / y_n. Scalar elasticity only.
class PriceFitObjective {
public:
    PriceFitObjective(const std::vector<Context>& contexts, const std::vector<double>& phat_values);

    int d1() const { return d1_; }
    // +infinity where beta >= 0.
    double value(const Vec& theta) const;
    Vec gradient(const Vec& theta) const;

private:
    int d1_ = 0;
    double s0_ = 0.0;
    Vec s1_;
    Mat zz_;
};

struct FitOptions {
    int restarts = 4;
    int max_iterations = 500;
    double tolerance = 1e-10;
};

// Approximate minimum of the price-fit objective over the intersection by
// projected gradient descent (Dykstra projections), multi-started from the
// first ellipsoid's center, its box projection, and random feasible points.
// The result is an upper bound on the true minimum. Empty when no feasible
// start was found.
std::optional<double> min_price_fit(const ConfidenceSet& set, const std::vector<Context>& offline_contexts,
                                    const std::vector<double>& phat_values, const ProblemSpec& spec,
                                    const FitOptions& options, CounterRng rng);

// Same minimization against a prebuilt objective.
std::optional<double> min_price_fit(const ConfidenceSet& set, const PriceFitObjective& objective,
                                    const FitOptions& options, CounterRng rng);

// Set builders. `online` holds Sigma_t (lam I + online outer products) and
// `combined` holds Sigma_{t,N}; both must have seen the same t observations.
struct OfflineSpectrum {
    double lam_min = 0.0;
    double lam_max = 0.0;
};

// CO3: three ellipsoids.
ConfidenceSet co3_set(const GramState& online, const GramState& combined, const RadiusParams& rp,
                      double V, const OfflineSpectrum& offline, const std::optional<NormBox>& box);
// GCO3: offline ball and online ellipsoid.
ConfidenceSet gco3_set(const GramState& online, const GramState& combined, const RadiusParams& rp,
                       double V, const OfflineSpectrum& offline, const std::optional<NormBox>& box);
// Single combined ellipsoid (the naive offline-informed UCB set).
ConfidenceSet combined_set(const GramState& combined, const RadiusParams& rp, double V,
                           const OfflineSpectrum& offline, const std::optional<NormBox>& box);
// Pure online ellipsoid.
ConfidenceSet online_set(const GramState& online, const RadiusParams& rp, const std::optional<NormBox>& box);

}  // namespace pricing
