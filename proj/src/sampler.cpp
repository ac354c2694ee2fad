// SPDX-License-Identifier: MIT
#include "pricing/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "pricing/errors.hpp"

namespace pricing {

ContextSampler ContextSampler::defaults(int d1, int d2) {
    ContextSampler s;
    s.d1 = d1;
    s.d2 = d2;
    if (d2 > 1) {
        s.y_low = 0.5;
        s.y_high = 1.5;
    }
    return s;
}

Context ContextSampler::sample(CounterRng& rng) const {
    Context ctx{Vec(d1), Vec(d2)};
    const double sx = 1.0 / std::sqrt(static_cast<double>(d1));
    const double sy = 1.0 / std::sqrt(static_cast<double>(d2));
    for (int i = 0; i < d1; ++i) ctx.x[i] = rng.uniform(x_low, x_high) * sx;
    for (int i = 0; i < d2; ++i) ctx.y[i] = rng.uniform(y_low, y_high) * sy;
    return ctx;
}

// With coordinates in [lo, hi] / sqrt(d), the norm is at most max(|lo|, |hi|).
double ContextSampler::x_norm_max() const { return std::max(std::abs(x_low), std::abs(x_high)); }
double ContextSampler::y_norm_max() const { return std::max(std::abs(y_low), std::abs(y_high)); }

double ContextSampler::y_abs_min() const {
    if (y_low > 0.0) return y_low / std::sqrt(static_cast<double>(d2));
    if (y_high < 0.0) return -y_high / std::sqrt(static_cast<double>(d2));
    return 0.0;
}

// E[v v^T] = s2 I + m^2 1 1^T for i.i.d. coordinates with mean m and variance
// s2, so the spectrum is {s2 (d-1 times), s2 + d m^2}.
static double iid_second_moment_min_eig(double lo, double hi, int d) {
    const double scale = 1.0 / static_cast<double>(d);
    const double mean = 0.5 * (lo + hi);
    const double var = (hi - lo) * (hi - lo) / 12.0;
    const double s2 = var * scale;
    const double m2 = mean * mean * scale;
    if (d == 1) return s2 + m2;
    return std::min(s2, s2 + d * m2);
}

double ContextSampler::lambda_min_Exx() const { return iid_second_moment_min_eig(x_low, x_high, d1); }
double ContextSampler::lambda_min_Eyy() const { return iid_second_moment_min_eig(y_low, y_high, d2); }

void ContextSampler::validate() const {
    if (d1 < 1 || d2 < 1) throw InvalidInput("sampler: dimensions must be >= 1");
    if (!(x_low <= x_high) || !(y_low <= y_high)) throw InvalidInput("sampler: empty range");
    if (!(x_low > 0.0)) throw InvalidInput("sampler: x coordinates must be positive");
    if (!(y_low > 0.0)) throw InvalidInput("sampler: y coordinates must be positive");
}

}  // namespace pricing
