// SPDX-License-Identifier: MIT
//
// Pricing policies. Every policy sees only the context, the price it charged
// and the realized demand; the clairvoyant benchmark is the one exception and
// is built with the true parameters explicitly.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "pricing/confidence.hpp"
#include "pricing/estimation.hpp"
#include "pricing/model.hpp"
#include "pricing/offline.hpp"
#include "pricing/random.hpp"

namespace pricing {

enum class PolicyKind { co3, gco3, rco3, ucb, ucb_offline, ts, ts_offline, greedy_offline, clairvoyant };

PolicyKind parse_policy_kind(std::string_view name);  // throws InvalidInput
std::string to_string(PolicyKind kind);
bool uses_offline(PolicyKind kind);

// Optimistic policies (co3, gco3, ucb, ucb_offline).
struct OfuConfig {
    double V = 0.0;     // bias bound
    double lam = 1.0;   // ridge regularization
    double eps = 0.0;   // 0 selects 1 / T^2
    long T = 1000;
    int grid_size = 512;
    int restarts = 4;   // min_price_fit and feasibility restarts
    // Testing hook: drop the offline ball from the GCO3 set.
    bool ignore_offline_ball = false;
};

struct Rco3Config {
    double alpha_exp = 0.25;  // test length T' = ceil(test_scale * T^alpha_exp)
    double test_scale = 1.0;
    double lam = 1.0;
    double eps = 0.0;  // 0 selects 1 / T^2
    long T = 1000;
    int grid_size = 512;

    long test_length() const;
};

struct TsConfig {
    double prior_cov_scale = 1.0;  // prior covariance s I; 0 pins the prior mean
    double noise_sigma = 0.1;
};

enum class PolicyMode { ofu, greedy, testing, online };
std::string to_string(PolicyMode mode);

class Policy {
public:
    virtual ~Policy() = default;

    virtual PolicyKind kind() const = 0;

    // Price in [l, u]. Must alternate with observe().
    double choose_price(const Context& ctx);
    // `price` must echo the value returned by the preceding choose_price().
    void observe(const Context& ctx, double price, double demand);

    long rounds() const { return rounds_; }
    virtual PolicyMode mode() const { return PolicyMode::ofu; }
    // Confidence set used for the latest price, when the policy keeps one.
    virtual const ConfidenceSet* last_set() const { return nullptr; }
    // Optimistic revenue at the latest price.
    virtual std::optional<double> last_ucb() const { return std::nullopt; }
    // Rounds that charged the lower price because the confidence set was empty.
    virtual long empty_set_rounds() const { return 0; }

protected:
    explicit Policy(const ProblemSpec& spec) : spec_(spec) {}

    virtual double do_choose(const Context& ctx) = 0;
    virtual void do_observe(const Context& ctx, double price, double demand) = 0;

    ProblemSpec spec_;

private:
    std::optional<double> pending_;
    long rounds_ = 0;
};

std::unique_ptr<Policy> make_co3(const OfflineSummary& offline, const OfflineDataset& data, const OfuConfig& cfg,
                                 const ProblemSpec& spec, CounterRng rng);
std::unique_ptr<Policy> make_gco3(const OfflineSummary& offline, const OfuConfig& cfg, const ProblemSpec& spec,
                                  CounterRng rng);
std::unique_ptr<Policy> make_rco3(const OfflineSummary& offline, const Rco3Config& cfg, const ProblemSpec& spec,
                                  CounterRng rng);
std::unique_ptr<Policy> make_ucb(const OfuConfig& cfg, const ProblemSpec& spec, CounterRng rng);
// Single combined ellipsoid built with V = 0.
std::unique_ptr<Policy> make_ucb_offline(const OfflineSummary& offline, const OfuConfig& cfg,
                                         const ProblemSpec& spec, CounterRng rng);
std::unique_ptr<Policy> make_ts(const Vec& prior_mean, const TsConfig& cfg, const ProblemSpec& spec,
                                CounterRng rng);
std::unique_ptr<Policy> make_ts_offline(const OfflineSummary& offline, const TsConfig& cfg,
                                        const ProblemSpec& spec, CounterRng rng);
std::unique_ptr<Policy> make_greedy_offline(const OfflineSummary& offline, const ProblemSpec& spec);
std::unique_ptr<Policy> make_clairvoyant(const DemandParams& theta_star, const ProblemSpec& spec);

// Outcome of CO3's offline test, exposed for inspection.
struct Co3TestResult {
    bool greedy = false;
    double bias_term = 0.0;   // max{V^2, 1 / lambda_min(Sigma_hat)}
    double threshold = 0.0;   // N x_max^2 y_max^2 / (y_min^2 lambda_min(E[xx^T])) * bias_term
    std::optional<double> fit;  // min_price_fit, when evaluated
};

Co3TestResult co3_offline_test(const OfflineSummary& offline, const OfflineDataset& data, const OfuConfig& cfg,
                               const ProblemSpec& spec, CounterRng rng);

// Only defined for policies built by make_co3.
const Co3TestResult& co3_test_result(const Policy& policy);

}  // namespace pricing
