// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pricing/errors.hpp"
#include "pricing/harness.hpp"
#include "pricing/offline.hpp"

using namespace pricing;

namespace {

OfflineRow row(std::initializer_list<double> x, double y, double p, double demand = 0.0) {
    OfflineRow r;
    r.x = Vec(static_cast<int>(x.size()));
    int i = 0;
    for (double v : x) r.x[i++] = v;
    r.y = Vec::Constant(1, y);
    r.p = p;
    r.demand = demand;
    return r;
}

OfflineDataset dataset(int d1, std::vector<OfflineRow> rows) {
    OfflineDataset d;
    d.d1 = d1;
    d.d2 = 1;
    d.rows = std::move(rows);
    return d;
}

struct Generated {
    ProblemSpec spec;
    ContextSampler sampler;
    DemandParams theta;
    OfflineDataset data;
};

Generated generate(long n, std::uint64_t seed, PriceScheme scheme = PriceScheme::uniform, double noise = 0.1) {
    ProblemConfig cfg = testing_util::problem(5, 1);
    cfg.noise_R = noise;
    Generated g{make_spec(cfg), make_sampler(cfg), {}, {}};
    CounterRng rng(seed, {0});
    g.theta = testing_util::draw_theta(cfg, rng);
    OfflineGenerator gen;
    gen.n = n;
    gen.scheme = scheme;
    g.data = generate_offline(g.theta, g.spec, gen, g.sampler,
                              {CounterRng(seed, {1}), CounterRng(seed, {2}), CounterRng(seed, {3})});
    return g;
}

}  // namespace

TEST(BuildSummary, SingleRowOuterProduct) {
    const OfflineSummary s = build_summary(dataset(2, {row({1.0, 0.0}, 1.0, 2.0)}));
    Mat expected(3, 3);
    expected << 1, 0, 2, 0, 0, 0, 2, 0, 4;
    EXPECT_TRUE(s.sigma_hat.isApprox(expected));
    EXPECT_EQ(s.n, 1);
    EXPECT_FALSE(s.A_hat.has_value());  // Sigma_xx singular
}

TEST(BuildSummary, ScalarOls) {
    OfflineSummary s = build_summary(dataset(1, {row({1.0}, 1.0, 3.0), row({1.0}, 1.0, 5.0)}));
    ASSERT_TRUE(s.A_hat);
    EXPECT_NEAR((*s.A_hat)[0], 4.0, 1e-14);
    s = build_summary(dataset(1, {row({1.0}, 1.0, 3.0), row({2.0}, 1.0, 5.0)}));
    EXPECT_NEAR((*s.A_hat)[0], 13.0 / 5.0, 1e-14);
}

TEST(Phat, Examples) {
    OfflineSummary s = empty_summary(1, 1);
    s.A_hat = Vec::Constant(1, 4.0);
    EXPECT_DOUBLE_EQ(phat(s, Context{Vec::Ones(1), Vec::Constant(1, 2.0)}), 2.0);
    s.A_hat = Vec::Zero(1);
    EXPECT_DOUBLE_EQ(phat(s, Context{Vec::Constant(1, 0.7), Vec::Constant(1, 1.3)}), 0.0);
    OfflineSummary wide = empty_summary(1, 2);
    EXPECT_THROW(phat(wide, Context{Vec::Ones(1), Vec::Ones(2)}), UnsupportedDimension);
}

TEST(Phat, ConstantFeaturesGiveAveragePrice) {
    std::vector<OfflineRow> rows;
    double sum = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double p = 1.0 + 0.3 * i;
        rows.push_back(row({1.0}, 1.0, p));
        sum += p;
    }
    const OfflineSummary s = build_summary(dataset(1, rows));
    EXPECT_NEAR(phat(s, Context{Vec::Ones(1), Vec::Ones(1)}), sum / 7.0, 1e-13);
}

TEST(DeltaSq, PerfectOfflineRuleIsZero) {
    OfflineSummary s = empty_summary(1, 1);
    s.A_hat = Vec::Constant(1, 1.0);
    ContextSampler sampler = ContextSampler::defaults(1, 1);
    sampler.y_low = sampler.y_high = 1.0;
    const DeltaEstimate e = estimate_delta_sq(s, testing_util::scalar_theta(2.0, -1.0), sampler, 1000, CounterRng(1));
    EXPECT_EQ(e.mean, 0.0);
}

TEST(DeltaSq, ConstantShift) {
    // p* = x for alpha = 2, beta = -1; phat = x + 0.1 needs a second feature,
    // so use x = (x1, 1) with A_hat = (1, 0.1) and alpha = (2, 0).
    OfflineSummary s = empty_summary(2, 1);
    s.A_hat = (Vec(2) << 1.0, 0.1).finished();
    ContextSampler sampler = ContextSampler::defaults(2, 1);
    sampler.x_low = sampler.x_high = std::sqrt(2.0);  // both coordinates equal 1
    sampler.y_low = sampler.y_high = 1.0;
    DemandParams th{(Vec(2) << 2.0, 0.0).finished(), Vec::Constant(1, -1.0)};
    const DeltaEstimate e = estimate_delta_sq(s, th, sampler, 100, CounterRng(1));
    EXPECT_NEAR(e.mean, 0.01, 1e-12);
}

TEST(DeltaSq, MatchesClosedFormIntegral) {
    OfflineSummary s = empty_summary(1, 1);
    s.A_hat = Vec::Constant(1, 1.0);
    ContextSampler sampler = ContextSampler::defaults(1, 1);
    sampler.x_low = 1.0;
    sampler.x_high = 2.0;
    sampler.y_low = sampler.y_high = 1.0;
    // phat = x, p* = x / 2: E[(x / 2)^2] = 7 / 12 on U[1, 2].
    const DeltaEstimate e = estimate_delta_sq(s, testing_util::scalar_theta(1.0, -1.0), sampler, 100000, CounterRng(5));
    EXPECT_LE(std::abs(e.mean - 7.0 / 12.0), 3.0 * e.std_error);
    EXPECT_GT(e.std_error, 0.0);
}

TEST(BiasedParams, ZeroAndAxisShift) {
    const ProblemSpec spec = make_spec(testing_util::problem(2, 1));
    DemandParams th{Vec::Constant(2, 0.5), Vec::Constant(1, -0.5)};
    const Vec e1 = Vec::Unit(3, 0);
    const DemandParams same = make_biased_params(th, 0.0, e1, spec);
    EXPECT_EQ(same.stacked(), th.stacked());
    const DemandParams moved = make_biased_params(th, 0.1, e1, spec);
    EXPECT_NEAR(moved.alpha[0], 0.6, 1e-15);
    EXPECT_EQ(moved.alpha[1], 0.5);
    EXPECT_EQ(moved.beta[0], -0.5);
}

TEST(BiasedParams, DistanceExactOnRandomDraws) {
    const ProblemConfig cfg = testing_util::problem(5, 1);
    const ProblemSpec spec = make_spec(cfg);
    CounterRng rng(9, {1});
    for (int i = 0; i < 100; ++i) {
        const DemandParams th = testing_util::draw_theta(cfg, rng);
        Vec dir(6);
        for (int j = 0; j < 6; ++j) dir[j] = rng.normal();
        const double v = rng.uniform(0.0, 0.5);
        const DemandParams b = make_biased_params(th, v, dir.normalized(), spec);
        EXPECT_NEAR((b.stacked() - th.stacked()).norm(), v, 1e-12);
        EXPECT_LE(b.alpha.norm(), spec.alpha_max);
        EXPECT_LE(b.beta.norm(), spec.beta_max);
    }
}

TEST(BiasedParams, InfeasibleThrows) {
    const ProblemSpec spec = make_spec(testing_util::problem(2, 1));
    DemandParams th{Vec::Constant(2, 0.5), Vec::Constant(1, -0.5)};
    EXPECT_THROW(make_biased_params(th, 100.0, Vec::Unit(3, 0), spec), InfeasibleBias);
}

TEST(GenerateOffline, NoiselessDemandIsExact) {
    const Generated g = generate(200, 4, PriceScheme::uniform, 0.0);
    for (const auto& r : g.data.rows) {
        EXPECT_EQ(r.demand, g.theta.alpha.dot(r.x) + g.theta.beta.dot(r.y) * r.p);
    }
}

TEST(GenerateOffline, DispersionGrowsLinearly) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Generated small = generate(10000, seed);
        const Generated large = generate(20000, seed + 100);
        const OfflineSummary a = build_summary(small.data);
        const OfflineSummary b = build_summary(large.data);
        EXPECT_GT(a.dispersion_c, 0.0);
        const double ratio = b.lam_min / a.lam_min;
        EXPECT_GE(ratio, 1.5);
        EXPECT_LE(ratio, 2.5);
    }
}

TEST(GenerateOffline, FixedPriceFixedContextIsRankOne) {
    OfflineDataset d = dataset(2, {});
    for (int i = 0; i < 50; ++i) d.rows.push_back(row({0.3, 0.4}, 1.0, 1.5, 1.0));
    const OfflineSummary s = build_summary(d);
    EXPECT_NEAR(s.lam_min, 0.0, 1e-10);
    Eigen::FullPivLU<Mat> lu(s.sigma_hat);
    lu.setThreshold(1e-10);
    EXPECT_EQ(lu.rank(), 1);
}

TEST(OfflineSummary, NormalEquationsAndMinimizer) {
    const Generated g = generate(500, 6);
    const OfflineSummary s = build_summary(g.data);
    ASSERT_TRUE(s.A_hat);
    const Mat sxx = s.sigma_hat.topLeftCorner(5, 5);
    const Vec sxy = s.sigma_hat.topRightCorner(5, 1);
    EXPECT_LE((sxx * *s.A_hat - sxy).norm(), 1e-8 * sxy.norm());
    auto loss = [&](const Vec& a) {
        double acc = 0.0;
        for (const auto& r : g.data.rows) {
            const double e = a.dot(r.x) - r.y[0] * r.p;
            acc += e * e;
        }
        return acc;
    };
    const double best = loss(*s.A_hat);
    CounterRng rng(6, {9});
    for (int i = 0; i < 100; ++i) {
        Vec delta(5);
        for (int j = 0; j < 5; ++j) delta[j] = 0.01 * rng.normal();
        EXPECT_LE(best, loss(*s.A_hat + delta));
    }
}

TEST(OfflineSummary, SchurIdentity) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Generated g = generate(50, seed);
        const OfflineSummary s = build_summary(g.data);
        const Mat sxx = s.sigma_hat.topLeftCorner(5, 5);
        const Vec sxy = s.sigma_hat.topRightCorner(5, 1);
        const double schur = s.sigma_hat(5, 5) - sxy.dot(sxx.ldlt().solve(sxy));
        EXPECT_NEAR(oracle::schur_min(g.data), schur, 1e-8 * s.sigma_hat(5, 5));
    }
}

TEST(OfflineSummary, DeltaBoundedByDispersionBound) {
    const Generated g = generate(2000, 8);
    const OfflineSummary s = build_summary(g.data);
    const DeltaEstimate e = estimate_delta_sq(s, g.theta, g.sampler, 20000, CounterRng(8, {4}));
    const ProblemSpec& sp = g.spec;
    const double u = sp.price_high();
    const double c = s.dispersion_c;
    const double bound = 2.0 * sp.beta_max * sp.beta_max * std::pow(sp.x_max, 4) * sp.y_max * sp.y_max * u * u /
                             (sp.l_beta * sp.l_beta * c * c) +
                         2.0 * u * u;
    EXPECT_LE(e.mean, bound);
}

TEST(OfflineCsv, RoundTripIsExact) {
    const Generated g = generate(30, 10);
    std::stringstream ss;
    write_offline_csv(ss, g.data);
    const OfflineDataset back = read_offline_csv(ss);
    ASSERT_EQ(back.size(), g.data.size());
    EXPECT_EQ(back.d1, 5);
    EXPECT_EQ(back.d2, 1);
    for (long i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back.rows[i].x, g.data.rows[i].x);
        EXPECT_EQ(back.rows[i].p, g.data.rows[i].p);
        EXPECT_EQ(back.rows[i].demand, g.data.rows[i].demand);
    }
    std::stringstream bad("x1,q,D\n1,2,3\n");
    EXPECT_THROW(read_offline_csv(bad), InvalidInput);
}
