// SPDX-License-Identifier: MIT
#pragma once

#include "pricing/harness.hpp"
#include "pricing/model.hpp"
#include "pricing/random.hpp"

namespace testing_util {

using pricing::Context;
using pricing::DemandParams;
using pricing::Vec;

inline pricing::ProblemConfig problem(int d1, int d2) {
    pricing::ProblemConfig p;
    p.d1 = d1;
    p.d2 = d2;
    return p;
}

inline DemandParams draw_theta(const pricing::ProblemConfig& cfg, pricing::CounterRng& rng) {
    DemandParams th;
    th.alpha = Vec(cfg.d1);
    th.beta = Vec(cfg.d2);
    for (int i = 0; i < cfg.d1; ++i) th.alpha[i] = rng.uniform(cfg.alpha_range[0], cfg.alpha_range[1]);
    for (int i = 0; i < cfg.d2; ++i) th.beta[i] = -rng.uniform(cfg.beta_range[0], cfg.beta_range[1]);
    return th;
}

// One-dimensional market with a x = a_coef and b y = b_coef at x = y = 1.
inline Context unit_context() { return Context{Vec::Ones(1), Vec::Ones(1)}; }

inline DemandParams scalar_theta(double a, double b) {
    DemandParams th;
    th.alpha = Vec::Constant(1, a);
    th.beta = Vec::Constant(1, b);
    return th;
}

inline pricing::ProblemSpec interval_spec(double l, double u) {
    pricing::ProblemSpec s;
    s.d1 = 1;
    s.d2 = 1;
    s.l_alpha = 2.0 * l;
    s.u_beta = 1.0;
    s.l_beta = 1.0;
    s.u_alpha = 2.0 * u;
    s.alpha_max = 10.0;
    s.beta_max = 10.0;
    return s;
}

}  // namespace testing_util
