// SPDX-License-Identifier: MIT
//
// Offline logs: representation, Gram summary, the empirical offline price
// rule, and synthetic generators with controllable bias and dispersion.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pricing/estimation.hpp"
#include "pricing/model.hpp"
#include "pricing/random.hpp"
#include "pricing/sampler.hpp"

namespace pricing {

struct OfflineRow {
    Vec x;
    Vec y;
    double p = 0.0;
    double demand = 0.0;
};

struct OfflineDataset {
    int d1 = 0;
    int d2 = 0;
    std::vector<OfflineRow> rows;

    long size() const { return static_cast<long>(rows.size()); }
    Context context(long n) const { return Context{rows[n].x, rows[n].y}; }
};

struct OfflineSummary {
    int d1 = 0;
    int d2 = 0;
    long n = 0;
    Mat sigma_hat;             // sum_n [x; y p][x; y p]^T
    Vec moment;                // sum_n [x; y p] D
    std::optional<Vec> A_hat;  // Sigma_xx^{-1} Sigma_xy, d2 = 1 only
    double lam_min = 0.0;
    double lam_max = 0.0;
    double dispersion_c = 0.0;  // lambda_min(Sigma_xx) / N

    OfflineMoments moments() const { return {sigma_hat, moment}; }
};

OfflineSummary build_summary(const OfflineDataset& data);
// An empty summary of the right shape (N = 0).
OfflineSummary empty_summary(int d1, int d2);

// A_hat^T x / y, not projected. Requires d2 = 1 and an available A_hat.
double phat(const OfflineSummary& summary, const Context& ctx);

struct DeltaEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long samples = 0;
};

// Monte Carlo estimate of E[(phat(x, y) - p*(x, y))^2] with the unprojected
// optimum p* = -alpha^T x / (2 beta^T y).
DeltaEstimate estimate_delta_sq(const OfflineSummary& summary, const DemandParams& theta_star,
                                const ContextSampler& sampler, long samples, CounterRng rng);

// theta_star + v_true * direction, or a reflection of it, kept inside the norm
// balls ||alpha|| <= alpha_max, ||beta|| <= beta_max. Throws InfeasibleBias.
DemandParams make_biased_params(const DemandParams& theta_star, double v_true, const Vec& direction,
                                const ProblemSpec& spec);

enum class PriceScheme { uniform, fixed, two_point };

PriceScheme parse_price_scheme(const std::string& name);
std::string to_string(PriceScheme scheme);

struct OfflineGenerator {
    long n = 0;
    PriceScheme scheme = PriceScheme::uniform;
    std::optional<double> fixed_price;  // default (l + u) / 2
};

struct OfflineStreams {
    CounterRng contexts;
    CounterRng prices;
    CounterRng noise;
};

OfflineDataset generate_offline(const DemandParams& theta_prime, const ProblemSpec& spec,
                                const OfflineGenerator& gen, const ContextSampler& sampler,
                                OfflineStreams streams);

// CSV with header x1..xd1,y1..yd2,p,D; values at 17 significant digits.
void write_offline_csv(std::ostream& os, const OfflineDataset& data);
OfflineDataset read_offline_csv(std::istream& is);

}  // namespace pricing
