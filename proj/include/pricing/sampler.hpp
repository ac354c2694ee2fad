// SPDX-License-Identifier: MIT
#pragma once

#include "pricing/model.hpp"
#include "pricing/random.hpp"

namespace pricing {

// Contexts with i.i.d. uniform coordinates.
//   x_i ~ U[x_low, x_high] / sqrt(d1)
//   y_i ~ U[y_low, y_high] / sqrt(d2)
// With the defaults the elasticity feature is U[0.8, 1.2] when d2 = 1 and
// U[0.5, 1.5] / sqrt(d2) otherwise.
struct ContextSampler {
    int d1 = 5;
    int d2 = 1;
    double x_low = 0.5;
    double x_high = 1.5;
    double y_low = 0.8;
    double y_high = 1.2;

    static ContextSampler defaults(int d1, int d2);

    Context sample(CounterRng& rng) const;

    // Support bounds implied by the ranges.
    double x_norm_max() const;
    double y_norm_max() const;
    double y_abs_min() const;  // smallest |y| when d2 = 1
    // Smallest eigenvalue of E[x x^T] (closed form for i.i.d. coordinates).
    double lambda_min_Exx() const;
    // Smallest eigenvalue of E[y y^T].
    double lambda_min_Eyy() const;

    void validate() const;
};

}  // namespace pricing
