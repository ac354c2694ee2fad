// SPDX-License-Identifier: MIT
#include "pricing/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pricing/errors.hpp"

namespace pricing {

Vec DemandParams::stacked() const {
    Vec v(dim());
    v << alpha, beta;
    return v;
}

DemandParams DemandParams::from_stacked(const Vec& v, int d1) {
    if (d1 < 0 || d1 > v.size()) {
        throw InvalidInput("from_stacked: d1 out of range");
    }
    return DemandParams{v.head(d1), v.tail(v.size() - d1)};
}

double ProblemSpec::param_bound() const {
    return std::sqrt(alpha_max * alpha_max + beta_max * beta_max);
}

double ProblemSpec::feature_bound() const {
    const double u = price_high();
    return std::sqrt(x_max * x_max + y_max * y_max * u * u);
}

void ProblemSpec::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidInput(std::string("problem spec: ") + name + " must be positive");
        }
    };
    if (d1 < 1 || d2 < 1) throw InvalidInput("problem spec: d1 and d2 must be >= 1");
    positive(alpha_max, "alpha_max");
    positive(beta_max, "beta_max");
    positive(x_max, "x_max");
    positive(y_max, "y_max");
    positive(y_min, "y_min");
    positive(l_alpha, "l_alpha");
    positive(u_alpha, "u_alpha");
    positive(l_beta, "l_beta");
    positive(u_beta, "u_beta");
    positive(lambda_min_Exx, "lambda_min_Exx");
    if (!(noise_R >= 0.0) || !std::isfinite(noise_R)) {
        throw InvalidInput("problem spec: noise_R must be >= 0");
    }
    if (l_alpha > u_alpha) throw InvalidInput("problem spec: l_alpha > u_alpha");
    if (l_beta > u_beta) throw InvalidInput("problem spec: l_beta > u_beta");
    if (!(price_low() < price_high())) throw InvalidInput("problem spec: need l < u");
}

double project_price(double p, const ProblemSpec& spec) {
    return std::clamp(p, spec.price_low(), spec.price_high());
}

static void check_dims(const DemandParams& theta, const Context& ctx) {
    if (theta.alpha.size() != ctx.x.size() || theta.beta.size() != ctx.y.size()) {
        throw InvalidInput("dimension mismatch between parameters and context");
    }
}

Vec price_feature(const Context& ctx, double p) {
    Vec a(ctx.x.size() + ctx.y.size());
    a << ctx.x, p * ctx.y;
    return a;
}

double mean_demand(const DemandParams& theta, double p, const Context& ctx) {
    check_dims(theta, ctx);
    return theta.alpha.dot(ctx.x) + theta.beta.dot(ctx.y) * p;
}

double revenue(const DemandParams& theta, double p, const Context& ctx) {
    return p * mean_demand(theta, p, ctx);
}

double optimal_price(const DemandParams& theta, const Context& ctx, const ProblemSpec& spec) {
    check_dims(theta, ctx);
    const double elasticity = theta.beta.dot(ctx.y);
    if (!(elasticity < 0.0)) {
        throw DegenerateElasticity("optimal_price: beta^T y must be negative");
    }
    return project_price(-theta.alpha.dot(ctx.x) / (2.0 * elasticity), spec);
}

double best_price_on_interval(double a, double b, const ProblemSpec& spec) {
    const double l = spec.price_low();
    const double u = spec.price_high();
    if (b < 0.0) return std::clamp(-a / (2.0 * b), l, u);
    // Convex or linear: an endpoint wins.
    const double rl = l * (a + b * l);
    const double ru = u * (a + b * u);
    return ru > rl ? u : l;
}

double step_regret(const DemandParams& theta_star, double p, const Context& ctx,
                   const ProblemSpec& spec) {
    const double p_star = optimal_price(theta_star, ctx, spec);
    const double a = theta_star.alpha.dot(ctx.x);
    const double b = theta_star.beta.dot(ctx.y);
    // r(q) - r(p) = (q - p)(a + b (q + p)); non-negative for p in [l, u]
    // because the projected optimum maximizes the concave revenue there.
    return (p_star - p) * (a + b * (p_star + p));
}

}  // namespace pricing
