// SPDX-License-Identifier: MIT
#include "pricing/config.hpp"
#include "pricing/errors.hpp"

namespace pricing {

namespace {

PolicySpec policy(PolicyKind kind, std::string label = {}, std::optional<double> v_ratio = std::nullopt) {
    PolicySpec p;
    p.kind = kind;
    p.label = std::move(label);
    p.v_ratio = v_ratio;
    return p;
}

}  // namespace

ExperimentConfig repro_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.run.T = 1000;
    cfg.run.reps = 20;
    cfg.run.seed = 20240601;
    cfg.offline.price_scheme = PriceScheme::uniform;
    cfg.problem.d1 = 5;
    if (name == "fig2a") {
        // Contexts on a larger scale make the online-only radius loose enough
        // that the offline data matters.
        cfg.problem.d2 = 1;
        cfg.problem.x_range = std::array<double, 2>{10.0, 30.0};
        cfg.problem.y_range = std::array<double, 2>{16.0, 24.0};
        cfg.offline.n = 10000;
        cfg.offline.v_true_scale = 5.0;
    } else if (name == "fig2b") {
        cfg.problem.d2 = 5;
        cfg.problem.alpha_range = {0.8, 1.2};
        cfg.problem.beta_range = {0.8, 1.2};
        cfg.problem.x_range = std::array<double, 2>{64.0, 96.0};
        cfg.problem.y_range = std::array<double, 2>{64.0, 96.0};
        cfg.offline.n = 10000;
        cfg.offline.v_true_scale = 7.0;
    } else if (name == "fig2c") {
        cfg.problem.d2 = 5;
        cfg.problem.noise_R = 0.03;
        cfg.problem.alpha_range = {0.8, 1.2};
        cfg.problem.beta_range = {0.8, 1.2};
        cfg.problem.x_range = std::array<double, 2>{16.0, 24.0};
        cfg.problem.y_range = std::array<double, 2>{16.0, 24.0};
        cfg.run.T = 5000;
        cfg.offline.n = 5000;
        PolicySpec rco3 = policy(PolicyKind::rco3);
        rco3.test_scale = 2.5;
        rco3.lam = 0.01;
        PolicySpec ucb = policy(PolicyKind::ucb);
        ucb.lam = 0.01;
        cfg.policies = {rco3, ucb};
        return cfg;
    } else {
        throw ConfigError("unknown experiment '" + name + "' (expected fig2a, fig2b or fig2c)");
    }
    const PolicyKind ours = cfg.problem.d2 == 1 ? PolicyKind::co3 : PolicyKind::gco3;
    const std::string base = to_string(ours);
    cfg.policies = {policy(ours, base + "_tight", 1.1),
                    policy(ours, base + "_loose", 10.0),
                    policy(PolicyKind::ucb),
                    policy(PolicyKind::ucb_offline),
                    policy(PolicyKind::ts),
                    policy(PolicyKind::ts_offline)};
    return cfg;
}

std::string repro_sweep_grid() { return "T^{-n/5}:0..9"; }

}  // namespace pricing
