// SPDX-License-Identifier: MIT
//
// Stochastic linear bandit over finite action sets, warm-started from biased
// offline (action, reward) pairs.
#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "pricing/confidence.hpp"
#include "pricing/estimation.hpp"
#include "pricing/random.hpp"
#include "pricing/trace.hpp"

namespace pricing {

struct ActionSet {
    std::vector<Vec> actions;
};

struct LbOfflineData {
    std::vector<Vec> actions;
    std::vector<double> rewards;
};

struct LbConfig {
    double V = 0.0;
    double lam = 1.0;
    double eps = 0.0;  // 0 selects 1 / T^2
    long T = 1000;
    double a_max = 1.0;        // action-norm bound, plays the role of L
    double param_bound = 1.0;  // ||theta|| bound
    double R = 0.1;
};

class LinearBanditPolicy {
public:
    virtual ~LinearBanditPolicy() = default;
    // Index of the optimistic action; ties go to the lowest index.
    virtual int select(const ActionSet& set) = 0;
    virtual void update(const Vec& action, double reward) = 0;
    virtual const ConfidenceSet* last_set() const { return nullptr; }
};

// One ellipsoid around the online ridge estimate.
std::unique_ptr<LinearBanditPolicy> make_lb_ucb(int dim, const LbConfig& cfg);
// Offline ball around the combined estimate intersected with the online ellipsoid.
// An empty log is allowed.
std::unique_ptr<LinearBanditPolicy> make_lb_offline_ucb(int dim, const LbOfflineData& offline, const LbConfig& cfg);
// Knows theta and always plays the best action.
std::unique_ptr<LinearBanditPolicy> make_lb_clairvoyant(const Vec& theta);

// argmax_a theta^T a, ties to the lowest index.
int best_action(const Vec& theta, const ActionSet& set);

// Synthetic instance: K actions drawn uniformly on the sphere of radius a_max
// each round, Gaussian reward noise.
struct LbEnv {
    Vec theta_star;
    int K = 20;
    double a_max = 1.0;
    double R = 0.1;
};

ActionSet sample_actions(int dim, int K, double a_max, CounterRng& rng);
LbOfflineData generate_lb_offline(const Vec& theta_prime, long n, double a_max, double R, CounterRng rng);

// Regret increments theta*^T (a*_t - a_t). Actions and noise come from
// `actions_rng` / `noise_rng` so that different policies see the same rounds.
RegretTrace lb_run(const LbEnv& env, LinearBanditPolicy& policy, long T, CounterRng actions_rng,
                   CounterRng noise_rng);

}  // namespace pricing
