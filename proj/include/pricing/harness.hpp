// SPDX-License-Identifier: MIT
//
// Experiment configuration, environments, episodes, replication and the
// bias sweep.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pricing/offline.hpp"
#include "pricing/policies.hpp"
#include "pricing/sampler.hpp"
#include "pricing/trace.hpp"

namespace pricing {

struct ProblemConfig {
    int d1 = 5;
    int d2 = 1;
    double noise_R = 0.1;
    // Per-coordinate sampling ranges: alpha_i ~ U[alpha_range], beta_i ~ -U[beta_range].
    std::array<double, 2> alpha_range{0.5, 1.5};
    std::array<double, 2> beta_range{0.5, 1.5};
    // Context ranges before the 1/sqrt(d) scaling; empty selects the defaults.
    std::optional<std::array<double, 2>> x_range;
    std::optional<std::array<double, 2>> y_range;
    // alpha_max, beta_max are this factor times the largest sampled norm.
    double param_slack = 1.25;
    // Fixed true parameters instead of per-replication draws.
    std::optional<DemandParams> theta_star;
};

struct OfflineConfig {
    long n = 1000;
    PriceScheme price_scheme = PriceScheme::uniform;
    std::optional<double> fixed_price;
    std::optional<double> v_true;  // exact bias; default v_true_scale * T^(-5/16)
    double v_true_scale = 1.0;
};

struct PolicySpec {
    PolicyKind kind = PolicyKind::ucb;
    std::string label;              // CSV name; defaults to the kind
    std::optional<double> v_bound;  // absolute bias bound V
    std::optional<double> v_ratio;  // V = v_ratio * v_true
    double lam = 1.0;
    double eps = 0.0;  // 0 selects 1 / T^2
    int restarts = 4;
    double alpha_exp = 0.25;
    double test_scale = 1.0;
    double prior_cov_scale = 1.0;
    std::optional<double> noise_sigma;  // default noise_R

    std::string name() const { return label.empty() ? to_string(kind) : label; }
};

struct RunConfig {
    long T = 1000;
    int reps = 20;
    std::uint64_t seed = 1;
    int grid_size = 512;
    long delta_mc_samples = 100000;
};

struct ExperimentConfig {
    ProblemConfig problem;
    OfflineConfig offline;
    std::vector<PolicySpec> policies;
    RunConfig run;

    double v_true() const;
    // Throws ConfigError on inconsistent settings.
    void validate() const;
};

// Problem bounds and context sampler implied by a configuration.
ContextSampler make_sampler(const ProblemConfig& cfg);
ProblemSpec make_spec(const ProblemConfig& cfg);

struct Environment {
    ProblemSpec spec;
    ContextSampler sampler;
    DemandParams theta_star;
    DemandParams theta_prime;
    double v_true = 0.0;
    OfflineDataset offline;
    OfflineSummary summary;
    std::optional<DeltaEstimate> delta_sq;
    std::uint64_t master = 0;
    int rep = 0;
};

Environment build_env(const ExperimentConfig& cfg, int rep);

// Policy for one replication. Only clairvoyant receives theta_star.
std::unique_ptr<Policy> make_policy(const PolicySpec& ps, int index, const ExperimentConfig& cfg,
                                    const Environment& env);

// Optional per-round hook, used by tests to inspect the policy.
struct RoundObserver {
    virtual ~RoundObserver() = default;
    virtual void on_round(long t, const Policy& policy, const Context& ctx, double price) = 0;
};

// Contexts and noise come from streams keyed by the replication only, so all
// policies face the same market path.
RegretTrace run_episode(Policy& policy, const Environment& env, long T, RoundObserver* observer = nullptr);

struct RepDiagnostics {
    int rep = 0;
    double v_true = 0.0;
    double lam_min = 0.0;
    double dispersion_c = 0.0;
    std::optional<DeltaEstimate> delta_sq;
    std::vector<std::string> modes;  // final mode per policy
    std::vector<long> empty_set_rounds;
};

struct PolicyAggregate {
    std::string policy;
    std::vector<double> mean;
    std::vector<double> band_low;
    std::vector<double> band_high;
    std::vector<double> finals;  // by rep

    double mean_final() const;
    double std_final() const;  // sample std across reps
};

struct ExperimentResult {
    std::vector<PolicyAggregate> aggregates;
    std::vector<RegretTrace> traces;  // policy-major, then rep; empty unless kept
    std::vector<RepDiagnostics> diagnostics;

    const PolicyAggregate& by_name(const std::string& name) const;
};

// Replications run on `threads` workers; results do not depend on it.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads, bool keep_traces);

// Linear bandit experiment: theta_star of norm theta_norm, offline log from
// theta_star + v_true * (random unit direction), V = v_ratio * v_true.
struct LbExperimentConfig {
    int dim = 5;
    int K = 20;
    long T = 2000;
    int reps = 20;
    long n = 2000;
    double v_true = 0.02;
    double v_ratio = 1.1;
    double a_max = 1.0;
    double theta_norm = 1.0;
    double R = 0.1;
    double lam = 1.0;
    double eps = 0.0;
    std::uint64_t seed = 1;
    std::vector<std::string> policies{"lb_ucb", "lb_offline_ucb"};

    void validate() const;
};

ExperimentResult run_lb_experiment(const LbExperimentConfig& cfg, int threads, bool keep_traces);

struct SweepRow {
    std::string policy;
    double v_true_sq = 0.0;
    double mean_final = 0.0;
    double std_final = 0.0;
};

// One experiment per grid value of V_true^2; theta_star depends only on the
// replication, so it is shared across grid points.
std::vector<SweepRow> bias_sweep(const ExperimentConfig& cfg, const std::vector<double>& v_true_sq_grid,
                                 int threads);

// "T^{-n/5}:0..9" or a comma-separated list of values.
std::vector<double> parse_sweep_grid(const std::string& spec, long T);

void write_trace_csv(std::ostream& os, const std::vector<RegretTrace>& traces);
void write_aggregate_csv(std::ostream& os, const ExperimentResult& result);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// 64-bit FNV-1a over bytes, for run digests.
std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace pricing
