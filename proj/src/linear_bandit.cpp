// SPDX-License-Identifier: MIT
#include "pricing/linear_bandit.hpp"

#include <cmath>
#include <limits>

#include "pricing/errors.hpp"

namespace pricing {

namespace {

RadiusParams lb_radius(const LbConfig& cfg, int dim) {
    RadiusParams rp;
    rp.lam = cfg.lam;
    const double t = static_cast<double>(std::max(cfg.T, 2L));
    rp.eps = cfg.eps > 0.0 ? cfg.eps : 1.0 / (t * t);
    rp.d = dim;
    rp.L = cfg.a_max;
    rp.param_bound = cfg.param_bound;
    rp.R = cfg.R;
    return rp;
}

int argmax_linear(const ConfidenceSet& set, const ActionSet& actions) {
    if (actions.actions.empty()) throw InvalidInput("linear bandit: empty action set");
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actions.actions.size(); ++i) {
        const double v = linear_max(set, actions.actions[i]);
        if (v > best_val) {
            best_val = v;
            best = static_cast<int>(i);
        }
    }
    return best;
}

class LbUcb : public LinearBanditPolicy {
public:
    LbUcb(GramState online, std::optional<GramState> combined, double lam_min, const LbConfig& cfg)
        : cfg_(cfg), rp_(lb_radius(cfg, online.dim())), online_(std::move(online)),
          combined_(std::move(combined)), lam_min_(lam_min) {}

    int select(const ActionSet& actions) override {
        const double t = static_cast<double>(online_.t);
        set_ = ConfidenceSet{};
        if (combined_) {
            set_.ellipsoids.push_back(
                Ellipsoid::make_ball(ridge_solve_vec(*combined_), radius_what_tN(t, rp_, cfg_.V, lam_min_)));
        }
        set_.ellipsoids.push_back(Ellipsoid::make(ridge_solve_vec(online_), online_.sigma, radius_w_t(t, rp_)));
        return argmax_linear(set_, actions);
    }

    void update(const Vec& action, double reward) override {
        gram_update_feature(online_, action, reward);
        if (combined_) gram_update_feature(*combined_, action, reward);
    }

    const ConfidenceSet* last_set() const override { return &set_; }

private:
    LbConfig cfg_;
    RadiusParams rp_;
    GramState online_;
    std::optional<GramState> combined_;
    double lam_min_;
    ConfidenceSet set_;
};

class LbClairvoyant : public LinearBanditPolicy {
public:
    explicit LbClairvoyant(Vec theta) : theta_(std::move(theta)) {}
    int select(const ActionSet& actions) override { return best_action(theta_, actions); }
    void update(const Vec&, double) override {}

private:
    Vec theta_;
};

}  // namespace

std::unique_ptr<LinearBanditPolicy> make_lb_ucb(int dim, const LbConfig& cfg) {
    return std::make_unique<LbUcb>(gram_init(cfg.lam, dim, dim), std::nullopt, 0.0, cfg);
}

std::unique_ptr<LinearBanditPolicy> make_lb_offline_ucb(int dim, const LbOfflineData& offline, const LbConfig& cfg) {
    if (offline.actions.size() != offline.rewards.size()) {
        throw InvalidInput("linear bandit: offline actions and rewards differ in length");
    }
    if (dim < 1) throw InvalidInput("linear bandit: dimension must be >= 1");
    OfflineMoments m{Mat::Zero(dim, dim), Vec::Zero(dim)};
    for (std::size_t n = 0; n < offline.actions.size(); ++n) {
        if (offline.actions[n].size() != dim) throw InvalidInput("linear bandit: offline action dimension mismatch");
        m.gram.noalias() += offline.actions[n] * offline.actions[n].transpose();
        m.moment += offline.rewards[n] * offline.actions[n];
    }
    const double lam_min = offline.actions.size() > 0 ? std::max(eig_extremes(m.gram).min, 0.0) : 0.0;
    return std::make_unique<LbUcb>(gram_init(cfg.lam, dim, dim), gram_init(cfg.lam, dim, m), lam_min, cfg);
}

std::unique_ptr<LinearBanditPolicy> make_lb_clairvoyant(const Vec& theta) {
    return std::make_unique<LbClairvoyant>(theta);
}

int best_action(const Vec& theta, const ActionSet& set) {
    if (set.actions.empty()) throw InvalidInput("linear bandit: empty action set");
    int best = 0;
    double best_val = theta.dot(set.actions[0]);
    for (std::size_t i = 1; i < set.actions.size(); ++i) {
        const double v = theta.dot(set.actions[i]);
        if (v > best_val) {
            best_val = v;
            best = static_cast<int>(i);
        }
    }
    return best;
}

ActionSet sample_actions(int dim, int K, double a_max, CounterRng& rng) {
    ActionSet set;
    set.actions.reserve(K);
    for (int k = 0; k < K; ++k) {
        Vec a(dim);
        for (int i = 0; i < dim; ++i) a[i] = rng.normal();
        set.actions.push_back(a.normalized() * a_max);
    }
    return set;
}

LbOfflineData generate_lb_offline(const Vec& theta_prime, long n, double a_max, double R, CounterRng rng) {
    LbOfflineData data;
    const int dim = static_cast<int>(theta_prime.size());
    for (long i = 0; i < n; ++i) {
        Vec a = sample_actions(dim, 1, a_max, rng).actions.front();
        data.rewards.push_back(theta_prime.dot(a) + R * rng.normal());
        data.actions.push_back(std::move(a));
    }
    return data;
}

RegretTrace lb_run(const LbEnv& env, LinearBanditPolicy& policy, long T, CounterRng actions_rng,
                   CounterRng noise_rng) {
    RegretTrace trace;
    const int dim = static_cast<int>(env.theta_star.size());
    for (long t = 0; t < T; ++t) {
        const ActionSet set = sample_actions(dim, env.K, env.a_max, actions_rng);
        const double noise = env.R * noise_rng.normal();
        const int chosen = policy.select(set);
        const int best = best_action(env.theta_star, set);
        const Vec& a = set.actions[chosen];
        trace.push(std::max(env.theta_star.dot(set.actions[best] - a), 0.0));
        policy.update(a, env.theta_star.dot(a) + noise);
    }
    return trace;
}

}  // namespace pricing
