// SPDX-License-Identifier: MIT
//
// Linear demand market: D = alpha^T x + beta^T y p + noise.
#pragma once

#include <Eigen/Dense>

namespace pricing {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// theta = (alpha, beta). alpha drives baseline demand, beta price elasticity.
struct DemandParams {
    Vec alpha;
    Vec beta;

    int d1() const { return static_cast<int>(alpha.size()); }
    int d2() const { return static_cast<int>(beta.size()); }
    int dim() const { return d1() + d2(); }

    // [alpha; beta]
    Vec stacked() const;
    static DemandParams from_stacked(const Vec& v, int d1);

    bool all_finite() const { return alpha.allFinite() && beta.allFinite(); }
};

struct Context {
    Vec x;  // baseline-demand features
    Vec y;  // elasticity features
};

// Market bounds. The admissible price interval [l, u] is derived from the
// baseline and elasticity bounds: l = l_alpha / (2 u_beta), u = u_alpha / (2 l_beta).
struct ProblemSpec {
    int d1 = 5;
    int d2 = 1;
    double alpha_max = 1.0;
    double beta_max = 1.0;
    double x_max = 1.0;
    double y_max = 1.0;
    double y_min = 1.0;
    double l_alpha = 1.0;
    double u_alpha = 1.0;
    double l_beta = 1.0;
    double u_beta = 1.0;
    double noise_R = 0.1;
    double lambda_min_Exx = 1.0;

    int dim() const { return d1 + d2; }
    double price_low() const { return l_alpha / (2.0 * u_beta); }
    double price_high() const { return u_alpha / (2.0 * l_beta); }
    // sqrt(alpha_max^2 + beta_max^2), the norm bound of the parameter set.
    double param_bound() const;
    // L = sqrt(x_max^2 + y_max^2 u^2), the feature-norm bound.
    double feature_bound() const;

    // Throws InvalidInput when the bounds are inconsistent.
    void validate() const;
};

double project_price(double p, const ProblemSpec& spec);

// A = [x; y p], the regression feature of an observation.
Vec price_feature(const Context& ctx, double p);

// p (alpha^T x + beta^T y p)
double revenue(const DemandParams& theta, double p, const Context& ctx);

// Proj_[l,u](-alpha^T x / (2 beta^T y)). Throws DegenerateElasticity when beta^T y >= 0.
double optimal_price(const DemandParams& theta, const Context& ctx, const ProblemSpec& spec);

// Maximizer of p (a + b p) over [l, u] for any sign of b; ties go to the lower price.
double best_price_on_interval(double a, double b, const ProblemSpec& spec);

// Revenue gap to the clairvoyant price under theta_star. Non-negative.
double step_regret(const DemandParams& theta_star, double p, const Context& ctx,
                   const ProblemSpec& spec);

// alpha^T x + beta^T y p
double mean_demand(const DemandParams& theta, double p, const Context& ctx);

}  // namespace pricing
