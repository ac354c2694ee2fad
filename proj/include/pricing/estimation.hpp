// SPDX-License-Identifier: MIT
//
// Regularized Gram matrices and ridge estimates.
#pragma once

#include <optional>

#include "pricing/model.hpp"

namespace pricing {

// sigma = lam I (+ offline Gram) + sum_s A_s A_s^T, moment = (offline moment) + sum_s A_s D_s,
// with A_s = [x_s; y_s p_s].
struct GramState {
    Mat sigma;
    Vec moment;
    long t = 0;
    double lam = 1.0;
    int d1 = 0;
    bool includes_offline = false;

    int dim() const { return static_cast<int>(moment.size()); }
};

struct OfflineMoments {
    Mat gram;    // sum of offline feature outer products
    Vec moment;  // sum of offline feature * demand
};

GramState gram_init(double lam, int d1, int d);
GramState gram_init(double lam, int d1, const OfflineMoments& offline);

void gram_update(GramState& state, const Context& ctx, double p, double demand);
// Raw feature update, used where the feature is not a priced context.
void gram_update_feature(GramState& state, const Vec& feature, double response);

// sigma^{-1} moment by Cholesky. Throws NumericError when sigma is not PD.
Vec ridge_solve_vec(const GramState& state);
DemandParams ridge_solve(const GramState& state);

struct EigExtremes {
    double min = 0.0;
    double max = 0.0;
};

// Extreme eigenvalues of (m + m^T) / 2. Throws InvalidInput on non-finite entries.
EigExtremes eig_extremes(const Mat& m);

}  // namespace pricing
