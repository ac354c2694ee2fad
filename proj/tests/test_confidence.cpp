// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pricing/confidence.hpp"
#include "pricing/errors.hpp"
#include "pricing/harness.hpp"
#include "pricing/offline.hpp"

using namespace pricing;

namespace {

RadiusParams unit_params() {
    RadiusParams rp;
    rp.lam = 1.0;
    rp.eps = 3.0 / std::exp(2.0);  // log(3 / eps) = 2
    rp.d = 2;
    rp.L = 1.0;
    rp.param_bound = std::sqrt(2.0);
    rp.R = 0.0;
    return rp;
}

Mat random_spd(int d, CounterRng& rng, double floor = 0.2) {
    Mat b(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b(i, j) = rng.normal();
    return b * b.transpose() / d + floor * Mat::Identity(d, d);
}

Vec random_vec(int d, CounterRng& rng, double scale = 1.0) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
    return v;
}

// Three overlapping ellipsoids around a shared anchor point.
std::vector<Ellipsoid> random_triple(int d, CounterRng& rng) {
    const Vec anchor = random_vec(d, rng);
    std::vector<Ellipsoid> out;
    for (int k = 0; k < 3; ++k) {
        const Mat shape = random_spd(d, rng);
        const Vec center = anchor + random_vec(d, rng, 0.3);
        const Vec diff = anchor - center;
        const double r = std::sqrt(diff.dot(shape * diff)) + rng.uniform(0.3, 1.0);
        out.push_back(Ellipsoid::make(center, shape, r));
    }
    return out;
}

}  // namespace

TEST(Ellipsoid, MembershipAndValidation) {
    const Ellipsoid b = Ellipsoid::make_ball(Vec::Zero(2), 1.0);
    EXPECT_TRUE(b.contains((Vec(2) << 0.6, 0.8).finished()));
    EXPECT_FALSE(b.contains((Vec(2) << 0.8, 0.8).finished()));
    Mat s(2, 2);
    s << 4, 0, 0, 1;
    const Ellipsoid e = Ellipsoid::make(Vec::Zero(2), s, 1.0);
    EXPECT_TRUE(e.contains((Vec(2) << 0.5, 0.0).finished()));
    EXPECT_FALSE(e.contains((Vec(2) << 0.6, 0.0).finished()));
    EXPECT_THROW(Ellipsoid::make(Vec::Zero(2), s, -1.0), InvalidInput);
    EXPECT_THROW(Ellipsoid::make(Vec::Zero(3), s, 1.0), InvalidInput);
}

TEST(Radius, OnlineAtTimeZero) {
    EXPECT_NEAR(radius_w_t(0.0, unit_params()), std::sqrt(2.0) + 2.0, 1e-14);
}

TEST(Radius, OnlineIncreasing) {
    const RadiusParams rp = unit_params();
    EXPECT_LT(radius_w_t(1.0, rp), radius_w_t(10.0, rp));
    EXPECT_LT(radius_w_t(10.0, rp), radius_w_t(100.0, rp));
}

TEST(Radius, OnlineMatchesArithmetic) {
    RadiusParams rp;
    rp.lam = 1.0;
    rp.eps = 1e-6;  // 1 / T^2 at T = 1000
    rp.d = 6;
    rp.L = 2.0;
    rp.param_bound = 1.7;
    const double logdet = 6.0 * std::log(1.0 + 1000.0 * 4.0 / 6.0);
    const double expected = 1.7 + std::sqrt(2.0 * std::log(3e6) + logdet);
    EXPECT_NEAR(radius_w_t(1000.0, rp), expected, 1e-12);
}

TEST(Radius, CombinedCollapse) {
    RadiusParams rp = unit_params();
    rp.lam = 2.0;
    const double expected = 2.0 * std::sqrt(2.0) / std::sqrt(2.0) + std::sqrt(2.0 * std::log(6.0 / rp.eps));
    EXPECT_NEAR(radius_w_tN(0.0, rp, 0.0, 0.0, 0.0), expected, 1e-14);
}

TEST(Radius, CombinedSlopeInV) {
    RadiusParams rp = unit_params();
    rp.R = 0.3;
    const double lmax = 250.0;
    const double h = 1e-3;
    const double slope = (radius_w_tN(5.0, rp, 0.2 + h, 40.0, lmax) - radius_w_tN(5.0, rp, 0.2, 40.0, lmax)) / h;
    EXPECT_NEAR(slope, lmax / std::sqrt(rp.lam + lmax), 1e-8);
}

TEST(Radius, CombinedAndBallMatchArithmetic) {
    RadiusParams rp;
    rp.lam = 0.7;
    rp.eps = 1e-4;
    rp.d = 6;
    rp.L = 3.0;
    rp.param_bound = 2.5;
    rp.R = 0.2;
    const double t = 321.0, V = 0.15, lmin = 55.0, lmax = 900.0;
    const double log6 = 2.0 * std::log(6.0 / 1e-4);
    const double logdet = 6.0 * std::log(1.0 + t * 9.0 / (6.0 * 0.7));
    const double noise = 0.2 * std::sqrt(6.0) + 0.2 * std::sqrt(log6);
    const double w_tn = 0.7 * 2.5 / std::sqrt(0.7 + lmin) + lmax * V / std::sqrt(0.7 + lmax) +
                        std::sqrt(log6 + logdet) + noise;
    const double what = 0.7 * 2.5 / (0.7 + lmin) + V + (std::sqrt(log6 + logdet) + noise) / std::sqrt(0.7 + lmin);
    EXPECT_NEAR(radius_w_tN(t, rp, V, lmin, lmax), w_tn, 1e-12);
    EXPECT_NEAR(radius_what_tN(t, rp, V, lmin), what, 1e-12);
}

TEST(Radius, BallLimits) {
    RadiusParams rp = unit_params();
    rp.R = 0.1;
    EXPECT_NEAR(radius_what_tN(100.0, rp, 0.3, 1e15), 0.3, 1e-6);
    EXPECT_LT(radius_what_tN(100.0, rp, 0.0, 1e12), 1e-3);
}

TEST(Radius, Monotonicity) {
    RadiusParams rp = unit_params();
    rp.R = 0.1;
    double prev = radius_what_tN(50.0, rp, 0.1, 0.0);
    for (double lmin : {1.0, 10.0, 100.0, 1e4}) {
        const double v = radius_what_tN(50.0, rp, 0.1, lmin);
        EXPECT_LE(v, prev);
        prev = v;
    }
    prev = radius_w_tN(50.0, rp, 0.0, 10.0, 100.0);
    for (double V : {0.01, 0.1, 1.0}) {
        const double v = radius_w_tN(50.0, rp, V, 10.0, 100.0);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Radius, RobustTestWidth) {
    RadiusParams rp = unit_params();
    rp.R = 1.0;
    EXPECT_NEAR(robust_test_width(rp, 0.0, 0.0), 4.0 * std::sqrt(2.0) + 4.0, 1e-12);
}

TEST(LinearMax, Balls) {
    const Vec c = (Vec(2) << 3.0, 4.0).finished();
    ConfidenceSet s;
    s.ellipsoids.push_back(Ellipsoid::make_ball(Vec::Zero(2), 1.0));
    EXPECT_NEAR(linear_max(s, c), 5.0, 1e-14);
    s.ellipsoids.push_back(Ellipsoid::make_ball(Vec::Zero(2), 2.0));
    EXPECT_NEAR(linear_max(s, c), 5.0, 1e-14);
    EXPECT_THROW(linear_max(ConfidenceSet{}, c), InvalidInput);
}

TEST(LinearMax, SandwichedByOracles) {
    CounterRng rng(21, {1});
    for (int trial = 0; trial < 20; ++trial) {
        const auto triple = random_triple(3, rng);
        ConfidenceSet s;
        s.ellipsoids = triple;
        const Vec c = random_vec(3, rng);
        const double lm = linear_max(s, c);
        EXPECT_NEAR(lm, oracle::dense_linear_max(triple, c), 1e-10 * (1.0 + std::abs(lm)));
        const auto lower = oracle::rejection_max_linear(triple, c, 100000, CounterRng(21, {2, static_cast<std::uint64_t>(trial)}));
        ASSERT_TRUE(lower.has_value());
        EXPECT_GE(lm, *lower);
    }
}

TEST(RejectionOracle, Examples) {
    const Vec c = (Vec(2) << 3.0, 4.0).finished();
    auto best = oracle::rejection_max_linear({Ellipsoid::make_ball(Vec::Zero(2), 1.0)}, c, 1000000, CounterRng(1));
    ASSERT_TRUE(best);
    EXPECT_GE(*best, 4.99);
    EXPECT_LE(*best, 5.0);
    best = oracle::rejection_max_linear(
        {Ellipsoid::make_ball(Vec::Zero(2), 1.0), Ellipsoid::make_ball((Vec(2) << 10.0, 0.0).finished(), 1.0)}, c,
        10000, CounterRng(1));
    EXPECT_FALSE(best.has_value());
    const Vec p = (Vec(2) << 0.25, -0.5).finished();
    best = oracle::rejection_max_linear({Ellipsoid::make_ball(p, 0.0)}, c, 10, CounterRng(1));
    ASSERT_TRUE(best);
    EXPECT_EQ(*best, c.dot(p));
}

TEST(PriceUcbMax, ZeroRadiusPicksNearestGridPoint) {
    const ProblemSpec spec = make_spec(testing_util::problem(5, 1));
    CounterRng rng(22, {1});
    const int grid = 512;
    for (int i = 0; i < 50; ++i) {
        const DemandParams th = testing_util::draw_theta(testing_util::problem(5, 1), rng);
        const Context ctx = make_sampler(testing_util::problem(5, 1)).sample(rng);
        ConfidenceSet s;
        s.ellipsoids.push_back(Ellipsoid::make_ball(th.stacked(), 0.0));
        const PriceChoice pc = price_ucb_max(s, ctx, spec, grid);
        const double step = (spec.price_high() - spec.price_low()) / (grid - 1);
        EXPECT_LE(std::abs(pc.price - optimal_price(th, ctx, spec)), 0.5 * step + 1e-12);
        EXPECT_NEAR(pc.ucb, revenue(th, pc.price, ctx), 1e-9);
    }
}

TEST(PriceUcbMax, GiantBallPicksAnEndpoint) {
    const ProblemSpec spec = make_spec(testing_util::problem(2, 1));
    ConfidenceSet s;
    s.ellipsoids.push_back(Ellipsoid::make_ball(Vec::Zero(3), 1e6));
    const Context ctx{Vec::Constant(2, 0.7), Vec::Ones(1)};
    const PriceChoice pc = price_ucb_max(s, ctx, spec, 64);
    // Closed-form per-price bound: 1e6 * ||[p x; p^2 y]|| grows in p.
    auto ucb = [&](double p) { return 1e6 * std::sqrt(p * p * ctx.x.squaredNorm() + p * p * p * p); };
    const double expect = ucb(spec.price_high()) >= ucb(spec.price_low()) ? spec.price_high() : spec.price_low();
    EXPECT_EQ(pc.price, expect);
}

TEST(PriceUcbMax, OptimismOnRandomInstances) {
    const ProblemConfig cfg = testing_util::problem(5, 1);
    const ProblemSpec spec = make_spec(cfg);
    const ContextSampler sampler = make_sampler(cfg);
    CounterRng rng(23, {1});
    const int grid = 64;
    for (int i = 0; i < 1000; ++i) {
        const DemandParams th = testing_util::draw_theta(cfg, rng);
        const Context ctx = sampler.sample(rng);
        ConfidenceSet s;
        for (int k = 0; k < 2; ++k) {
            const Mat shape = random_spd(6, rng);
            const Vec center = th.stacked() + random_vec(6, rng, 0.2);
            const Vec diff = th.stacked() - center;
            s.ellipsoids.push_back(Ellipsoid::make(center, shape, std::sqrt(diff.dot(shape * diff)) + 0.05));
        }
        ASSERT_TRUE(s.contains(th.stacked()));
        const PriceChoice pc = price_ucb_max(s, ctx, spec, grid);
        for (int k = 0; k < grid; ++k) {
            const double p = spec.price_low() + (spec.price_high() - spec.price_low()) * k / (grid - 1);
            ASSERT_GE(pc.ucb, revenue(th, p, ctx) - 1e-9);
        }
    }
}

TEST(Projection, LandsOnSurfaceAndSatisfiesKkt) {
    CounterRng rng(24, {1});
    for (int i = 0; i < 50; ++i) {
        const Ellipsoid e = Ellipsoid::make(random_vec(4, rng), random_spd(4, rng), 0.5);
        const Vec theta = e.center + random_vec(4, rng, 3.0);
        if (e.contains(theta)) continue;
        const Vec x = project_onto(e, theta);
        EXPECT_NEAR(e.distance(x), 0.5, 1e-8);
        // theta - x is parallel to the outward normal shape (x - center).
        const Vec r = theta - x;
        const Vec n = e.shape * (x - e.center);
        EXPECT_NEAR(r.dot(n), r.norm() * n.norm(), 1e-6 * r.norm() * n.norm());
    }
}

TEST(FeasiblePoint, Examples) {
    ConfidenceSet s;
    s.ellipsoids.push_back(Ellipsoid::make_ball(Vec::Ones(2), 1.0));
    s.ellipsoids.push_back(Ellipsoid::make_ball(Vec::Ones(2), 2.0));
    auto p = feasible_point(s, 4, CounterRng(1));
    ASSERT_TRUE(p);
    EXPECT_EQ(*p, Vec::Ones(2));

    ConfidenceSet apart;
    apart.ellipsoids.push_back(Ellipsoid::make_ball(Vec::Zero(2), 1.0));
    apart.ellipsoids.push_back(Ellipsoid::make_ball((Vec(2) << 10.0, 0.0).finished(), 1.0));
    EXPECT_FALSE(feasible_point(apart, 4, CounterRng(1)).has_value());

    CounterRng rng(25, {1});
    for (int trial = 0; trial < 50; ++trial) {
        ConfidenceSet t;
        t.ellipsoids = random_triple(4, rng);
        const auto q = feasible_point(t, 4, CounterRng(25, {2, static_cast<std::uint64_t>(trial)}));
        ASSERT_TRUE(q);
        EXPECT_TRUE(t.contains(*q, 1e-9));
    }
}

namespace {

struct FitToy {
    std::vector<Context> contexts;
    std::vector<double> prices;
};

FitToy fit_toy(const DemandParams& truth, int rows, CounterRng& rng, double jitter) {
    FitToy toy;
    for (int i = 0; i < rows; ++i) {
        Context c{Vec::Constant(1, rng.uniform(0.5, 1.5)), Vec::Constant(1, rng.uniform(0.8, 1.2))};
        const double star = -truth.alpha.dot(c.x) / (2.0 * truth.beta.dot(c.y));
        toy.prices.push_back(star + jitter * rng.normal());
        toy.contexts.push_back(c);
    }
    return toy;
}

double direct_fit(const FitToy& toy, double a, double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < toy.contexts.size(); ++i) {
        const double star = -a * toy.contexts[i].x[0] / (2.0 * b * toy.contexts[i].y[0]);
        acc += (toy.prices[i] - star) * (toy.prices[i] - star);
    }
    return acc;
}

}  // namespace

TEST(MinPriceFit, ZeroAtPlantedTruth) {
    CounterRng rng(26, {1});
    const DemandParams truth = testing_util::scalar_theta(1.0, -1.0);
    const FitToy toy = fit_toy(truth, 30, rng, 0.0);
    ConfidenceSet s;
    s.ellipsoids.push_back(Ellipsoid::make_ball(truth.stacked() + Vec::Constant(2, 0.05), 0.3));
    FitOptions opts;
    const auto v = min_price_fit(s, PriceFitObjective(toy.contexts, toy.prices), opts, CounterRng(2));
    ASSERT_TRUE(v);
    EXPECT_LE(*v, 1e-8);
}

TEST(MinPriceFit, SingletonEvaluatesObjective) {
    CounterRng rng(26, {2});
    const FitToy toy = fit_toy(testing_util::scalar_theta(1.0, -1.0), 20, rng, 0.2);
    const Vec theta0 = (Vec(2) << 1.2, -0.9).finished();
    ConfidenceSet s;
    s.ellipsoids.push_back(Ellipsoid::make_ball(theta0, 0.0));
    const auto v = min_price_fit(s, PriceFitObjective(toy.contexts, toy.prices), FitOptions{}, CounterRng(3));
    ASSERT_TRUE(v);
    EXPECT_NEAR(*v, direct_fit(toy, 1.2, -0.9), 1e-10);
}

TEST(MinPriceFit, MatchesGridSearch) {
    CounterRng rng(26, {3});
    const FitToy toy = fit_toy(testing_util::scalar_theta(1.0, -1.0), 20, rng, 0.2);
    const Vec center = (Vec(2) << 1.3, -0.8).finished();
    const double r = 0.25;
    ConfidenceSet s;
    s.ellipsoids.push_back(Ellipsoid::make_ball(center, r));
    s.box = NormBox{1, 1.5, 1.5};
    const auto v = min_price_fit(s, PriceFitObjective(toy.contexts, toy.prices), FitOptions{}, CounterRng(4));
    ASSERT_TRUE(v);

    // Coarse 1000 x 1000 grid over the bounding square, then a refinement
    // grid around the best cell.
    auto search = [&](double a0, double a1, double b0, double b1, double& ba, double& bb) {
        double best = std::numeric_limits<double>::infinity();
        const int n = 1000;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double a = a0 + (a1 - a0) * i / (n - 1);
                const double b = b0 + (b1 - b0) * j / (n - 1);
                const Vec th = (Vec(2) << a, b).finished();
                if (!s.contains(th, 0.0) || b >= 0.0) continue;
                const double f = direct_fit(toy, a, b);
                if (f < best) {
                    best = f;
                    ba = a;
                    bb = b;
                }
            }
        }
        return best;
    };
    double ba = 0.0, bb = 0.0;
    search(center[0] - r, center[0] + r, center[1] - r, center[1] + r, ba, bb);
    const double h = 2.0 * r / 999.0;
    const double grid_min = search(ba - 2 * h, ba + 2 * h, bb - 2 * h, bb + 2 * h, ba, bb);
    EXPECT_NEAR(*v, grid_min, 1e-3);
}

TEST(SetBuilders, GeneralSetContainsScalarSet) {
    const ProblemConfig cfg = testing_util::problem(5, 1);
    const ProblemSpec spec = make_spec(cfg);
    const ContextSampler sampler = make_sampler(cfg);
    CounterRng rng(27, {1});
    const DemandParams truth = testing_util::draw_theta(cfg, rng);
    OfflineGenerator gen;
    gen.n = 300;
    const OfflineDataset data = generate_offline(truth, spec, gen, sampler,
                                                 {CounterRng(27, {2}), CounterRng(27, {3}), CounterRng(27, {4})});
    const OfflineSummary sum = build_summary(data);
    GramState online = gram_init(1.0, 5, 6);
    GramState combined = gram_init(1.0, 5, sum.moments());
    for (int t = 0; t < 40; ++t) {
        const Context ctx = sampler.sample(rng);
        const double p = rng.uniform(spec.price_low(), spec.price_high());
        const double dmd = mean_demand(truth, p, ctx) + 0.1 * rng.normal();
        gram_update(online, ctx, p, dmd);
        gram_update(combined, ctx, p, dmd);
    }
    RadiusParams rp;
    rp.eps = 0.05;
    rp.d = 6;
    rp.L = spec.feature_bound();
    rp.param_bound = spec.param_bound();
    rp.R = 0.1;
    const OfflineSpectrum spec_off{sum.lam_min, sum.lam_max};
    const ConfidenceSet three = co3_set(online, combined, rp, 0.05, spec_off, NormBox::from_spec(spec));
    const ConfidenceSet two = gco3_set(online, combined, rp, 0.05, spec_off, NormBox::from_spec(spec));
    EXPECT_EQ(three.ellipsoids.size(), 3u);
    EXPECT_EQ(two.ellipsoids.size(), 2u);
    EXPECT_TRUE(three.contains(truth.stacked()));
    const Vec c = ridge_solve_vec(combined);
    for (int i = 0; i < 2000; ++i) {
        const Vec th = c + random_vec(6, rng, 0.3);
        if (three.contains(th)) EXPECT_TRUE(two.contains(th));
    }
}
