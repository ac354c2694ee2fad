// SPDX-License-Identifier: MIT
#include "pricing/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <ostream>
#include <regex>
#include <sstream>
#include <thread>

#include "pricing/errors.hpp"
#include "pricing/linear_bandit.hpp"

namespace pricing {

namespace {

std::uint64_t u64(long v) { return static_cast<std::uint64_t>(v); }
std::uint64_t stream(Stream s) { return static_cast<std::uint64_t>(s); }

CounterRng rep_stream(std::uint64_t master, int rep, Stream s) {
    return CounterRng(master, {u64(rep), stream(s)});
}

// Shortest text that parses back to the same double.
std::string fmt_exact(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Range of sum_i c_i v_i / sqrt(d) for v_i in [lo, hi].
std::array<double, 2> dot_range(const Vec& c, double lo, double hi) {
    const double s = 1.0 / std::sqrt(static_cast<double>(c.size()));
    double mn = 0.0, mx = 0.0;
    for (int i = 0; i < c.size(); ++i) {
        mn += std::min(c[i] * lo, c[i] * hi) * s;
        mx += std::max(c[i] * lo, c[i] * hi) * s;
    }
    return {mn, mx};
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

double ExperimentConfig::v_true() const {
    if (offline.v_true) return *offline.v_true;
    return offline.v_true_scale * std::pow(static_cast<double>(run.T), -5.0 / 16.0);
}

void ExperimentConfig::validate() const {
    const auto& p = problem;
    if (p.d1 < 1 || p.d2 < 1) throw ConfigError("problem: d1 and d2 must be >= 1");
    if (!(p.noise_R > 0.0)) throw ConfigError("problem: noise_R must be positive");
    auto check_range = [](const std::array<double, 2>& r, const char* what) {
        if (!(r[0] > 0.0 && r[0] <= r[1])) throw ConfigError(std::string("problem: bad ") + what);
    };
    check_range(p.alpha_range, "alpha_range");
    check_range(p.beta_range, "beta_range");
    if (p.x_range) check_range(*p.x_range, "x_range");
    if (p.y_range) check_range(*p.y_range, "y_range");
    if (!(p.param_slack >= 1.0)) throw ConfigError("problem: param_slack must be >= 1");
    if (p.theta_star && (p.theta_star->d1() != p.d1 || p.theta_star->d2() != p.d2)) {
        throw ConfigError("problem: theta_star dimensions differ from d1, d2");
    }
    if (offline.n < 0) throw ConfigError("offline: n must be >= 0");
    if (offline.v_true && !(*offline.v_true >= 0.0)) throw ConfigError("offline: v_true must be >= 0");
    if (!(offline.v_true_scale >= 0.0)) throw ConfigError("offline: v_true_scale must be >= 0");
    if (run.T < 1) throw ConfigError("run: T must be >= 1");
    if (run.reps < 1) throw ConfigError("run: reps must be >= 1");
    if (run.grid_size < 2) throw ConfigError("run: grid_size must be >= 2");
    if (run.delta_mc_samples < 0) throw ConfigError("run: delta_mc_samples must be >= 0");
    if (policies.empty()) throw ConfigError("policies: at least one policy is required");
    std::vector<std::string> names;
    for (const auto& ps : policies) {
        if (ps.v_bound && ps.v_ratio) throw ConfigError("policy " + ps.name() + ": give v_bound or v_ratio, not both");
        if (ps.v_bound && !(*ps.v_bound >= 0.0)) throw ConfigError("policy " + ps.name() + ": v_bound must be >= 0");
        if (ps.v_ratio && !(*ps.v_ratio >= 0.0)) throw ConfigError("policy " + ps.name() + ": v_ratio must be >= 0");
        if (!(ps.lam > 0.0)) throw ConfigError("policy " + ps.name() + ": lam must be positive");
        if (!(ps.eps >= 0.0 && ps.eps < 1.0)) throw ConfigError("policy " + ps.name() + ": eps must lie in [0, 1)");
        if (ps.kind == PolicyKind::co3 && problem.d2 != 1) {
            throw ConfigError("policy co3 needs d2 = 1; use gco3");
        }
        if (ps.kind == PolicyKind::greedy_offline && problem.d2 != 1) {
            throw ConfigError("policy greedy_offline needs d2 = 1");
        }
        if (ps.kind == PolicyKind::rco3) {
            Rco3Config rc;
            rc.alpha_exp = ps.alpha_exp;
            rc.test_scale = ps.test_scale;
            rc.T = run.T;
            if (rc.test_length() >= run.T) throw ConfigError("policy rco3: test length must be shorter than T");
        }
        for (const auto& n : names) {
            if (n == ps.name()) throw ConfigError("policies: duplicate label " + n);
        }
        names.push_back(ps.name());
    }
}

ContextSampler make_sampler(const ProblemConfig& cfg) {
    ContextSampler s = ContextSampler::defaults(cfg.d1, cfg.d2);
    if (cfg.x_range) {
        s.x_low = (*cfg.x_range)[0];
        s.x_high = (*cfg.x_range)[1];
    }
    if (cfg.y_range) {
        s.y_low = (*cfg.y_range)[0];
        s.y_high = (*cfg.y_range)[1];
    }
    s.validate();
    return s;
}

ProblemSpec make_spec(const ProblemConfig& cfg) {
    const ContextSampler s = make_sampler(cfg);
    ProblemSpec spec;
    spec.d1 = cfg.d1;
    spec.d2 = cfg.d2;
    spec.noise_R = cfg.noise_R;
    spec.x_max = s.x_norm_max();
    spec.y_max = s.y_norm_max();
    spec.y_min = s.y_abs_min();
    spec.lambda_min_Exx = s.lambda_min_Exx();
    const double r1 = std::sqrt(static_cast<double>(cfg.d1));
    const double r2 = std::sqrt(static_cast<double>(cfg.d2));
    if (cfg.theta_star) {
        const auto a = dot_range(cfg.theta_star->alpha, s.x_low, s.x_high);
        const auto b = dot_range(-cfg.theta_star->beta, s.y_low, s.y_high);
        spec.l_alpha = a[0];
        spec.u_alpha = a[1];
        spec.l_beta = b[0];
        spec.u_beta = b[1];
        spec.alpha_max = cfg.param_slack * cfg.theta_star->alpha.norm();
        spec.beta_max = cfg.param_slack * cfg.theta_star->beta.norm();
    } else {
        // alpha^T x over alpha_i in alpha_range and x_i in x_range / sqrt(d1).
        spec.l_alpha = r1 * cfg.alpha_range[0] * s.x_low;
        spec.u_alpha = r1 * cfg.alpha_range[1] * s.x_high;
        spec.l_beta = r2 * cfg.beta_range[0] * s.y_low;
        spec.u_beta = r2 * cfg.beta_range[1] * s.y_high;
        spec.alpha_max = cfg.param_slack * r1 * cfg.alpha_range[1];
        spec.beta_max = cfg.param_slack * r2 * cfg.beta_range[1];
    }
    if (!(spec.l_alpha > 0.0 && spec.l_beta > 0.0)) {
        throw ConfigError("problem: baseline demand and elasticity must keep their signs on the context support");
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Environments and episodes

Environment build_env(const ExperimentConfig& cfg, int rep) {
    Environment env;
    env.master = cfg.run.seed;
    env.rep = rep;
    env.sampler = make_sampler(cfg.problem);
    env.spec = make_spec(cfg.problem);
    const int d1 = cfg.problem.d1;
    const int d2 = cfg.problem.d2;

    if (cfg.problem.theta_star) {
        env.theta_star = *cfg.problem.theta_star;
    } else {
        CounterRng r = rep_stream(env.master, rep, Stream::theta);
        env.theta_star.alpha = Vec(d1);
        env.theta_star.beta = Vec(d2);
        for (int i = 0; i < d1; ++i) env.theta_star.alpha[i] = r.uniform(cfg.problem.alpha_range[0], cfg.problem.alpha_range[1]);
        for (int i = 0; i < d2; ++i) env.theta_star.beta[i] = -r.uniform(cfg.problem.beta_range[0], cfg.problem.beta_range[1]);
    }

    env.v_true = cfg.v_true();
    CounterRng dr = rep_stream(env.master, rep, Stream::bias_direction);
    Vec dir(d1 + d2);
    for (int i = 0; i < dir.size(); ++i) dir[i] = dr.normal();
    env.theta_prime = make_biased_params(env.theta_star, env.v_true, dir.normalized(), env.spec);

    OfflineGenerator gen;
    gen.n = cfg.offline.n;
    gen.scheme = cfg.offline.price_scheme;
    gen.fixed_price = cfg.offline.fixed_price;
    OfflineStreams streams{rep_stream(env.master, rep, Stream::offline_contexts),
                           rep_stream(env.master, rep, Stream::offline_prices),
                           rep_stream(env.master, rep, Stream::offline_noise)};
    if (gen.n > 0) {
        env.offline = generate_offline(env.theta_prime, env.spec, gen, env.sampler, streams);
        env.summary = build_summary(env.offline);
    } else {
        env.offline.d1 = d1;
        env.offline.d2 = d2;
        env.summary = empty_summary(d1, d2);
    }
    if (d2 == 1 && env.summary.A_hat && cfg.run.delta_mc_samples > 0) {
        env.delta_sq = estimate_delta_sq(env.summary, env.theta_star, env.sampler, cfg.run.delta_mc_samples,
                                         rep_stream(env.master, rep, Stream::delta_mc));
    }
    return env;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& ps, int index, const ExperimentConfig& cfg,
                                    const Environment& env) {
    CounterRng rng(env.master, {u64(env.rep), stream(Stream::policy), u64(index)});
    OfuConfig oc;
    oc.V = ps.v_bound ? *ps.v_bound : ps.v_ratio ? *ps.v_ratio * env.v_true : 0.0;
    oc.lam = ps.lam;
    oc.eps = ps.eps;
    oc.T = cfg.run.T;
    oc.grid_size = cfg.run.grid_size;
    oc.restarts = ps.restarts;
    TsConfig tc;
    tc.prior_cov_scale = ps.prior_cov_scale;
    tc.noise_sigma = ps.noise_sigma ? *ps.noise_sigma : env.spec.noise_R;
    switch (ps.kind) {
        case PolicyKind::co3:
            return make_co3(env.summary, env.offline, oc, env.spec, rng);
        case PolicyKind::gco3:
            return make_gco3(env.summary, oc, env.spec, rng);
        case PolicyKind::rco3: {
            Rco3Config rc;
            rc.alpha_exp = ps.alpha_exp;
            rc.test_scale = ps.test_scale;
            rc.lam = ps.lam;
            rc.eps = ps.eps;
            rc.T = cfg.run.T;
            rc.grid_size = cfg.run.grid_size;
            return make_rco3(env.summary, rc, env.spec, rng);
        }
        case PolicyKind::ucb:
            return make_ucb(oc, env.spec, rng);
        case PolicyKind::ucb_offline:
            return make_ucb_offline(env.summary, oc, env.spec, rng);
        case PolicyKind::ts:
            return make_ts(Vec::Zero(env.spec.dim()), tc, env.spec, rng);
        case PolicyKind::ts_offline:
            return make_ts_offline(env.summary, tc, env.spec, rng);
        case PolicyKind::greedy_offline:
            return make_greedy_offline(env.summary, env.spec);
        case PolicyKind::clairvoyant:
            return make_clairvoyant(env.theta_star, env.spec);
    }
    throw ConfigError("unknown policy kind");
}

RegretTrace run_episode(Policy& policy, const Environment& env, long T, RoundObserver* observer) {
    CounterRng contexts = rep_stream(env.master, env.rep, Stream::online_contexts);
    CounterRng noise = rep_stream(env.master, env.rep, Stream::online_noise);
    RegretTrace trace;
    trace.rep = env.rep;
    trace.instant.reserve(T);
    trace.cumulative.reserve(T);
    for (long t = 0; t < T; ++t) {
        const Context ctx = env.sampler.sample(contexts);
        const double eps = env.spec.noise_R * noise.normal();
        const double p = policy.choose_price(ctx);
        const double demand = mean_demand(env.theta_star, p, ctx) + eps;
        trace.push(step_regret(env.theta_star, p, ctx, env.spec));
        if (observer) observer->on_round(t, policy, ctx, p);
        policy.observe(ctx, p, demand);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Replication

double PolicyAggregate::mean_final() const {
    double s = 0.0;
    for (double v : finals) s += v;
    return finals.empty() ? 0.0 : s / static_cast<double>(finals.size());
}

double PolicyAggregate::std_final() const {
    if (finals.size() < 2) return 0.0;
    const double m = mean_final();
    double s = 0.0;
    for (double v : finals) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(finals.size() - 1));
}

const PolicyAggregate& ExperimentResult::by_name(const std::string& name) const {
    for (const auto& a : aggregates) {
        if (a.policy == name) return a;
    }
    throw InvalidInput("no policy named " + name);
}

namespace {

struct RepOutput {
    std::vector<RegretTrace> traces;  // one per policy
    RepDiagnostics diag;
};

RepOutput run_rep(const ExperimentConfig& cfg, int rep) {
    const Environment env = build_env(cfg, rep);
    RepOutput out;
    out.diag.rep = rep;
    out.diag.v_true = env.v_true;
    out.diag.lam_min = env.summary.lam_min;
    out.diag.dispersion_c = env.summary.dispersion_c;
    out.diag.delta_sq = env.delta_sq;
    for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
        auto policy = make_policy(cfg.policies[i], static_cast<int>(i), cfg, env);
        RegretTrace tr = run_episode(*policy, env, cfg.run.T);
        tr.policy = cfg.policies[i].name();
        out.diag.modes.push_back(to_string(policy->mode()));
        out.diag.empty_set_rounds.push_back(policy->empty_set_rounds());
        out.traces.push_back(std::move(tr));
    }
    return out;
}

}  // namespace

namespace {

// Runs fn(rep) for every replication on up to `threads` workers; output slots
// are indexed by rep, so the result does not depend on scheduling.
template <class Out, class Fn>
std::vector<Out> parallel_reps(int reps, int threads, Fn fn) {
    std::vector<Out> outputs(reps);
    std::vector<std::exception_ptr> errors(reps);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int rep = next++; rep < reps; rep = next++) {
            try {
                outputs[rep] = fn(rep);
            } catch (...) {
                errors[rep] = std::current_exception();
            }
        }
    };
    const int n_threads = std::clamp(threads, 1, reps);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return outputs;
}

// Mean curve and mean +- 2 SEM band of policy i over replications.
PolicyAggregate aggregate_policy(const std::string& name, const std::vector<RepOutput>& outputs, std::size_t i,
                                 long T) {
    const int reps = static_cast<int>(outputs.size());
    const double n = static_cast<double>(reps);
    PolicyAggregate agg;
    agg.policy = name;
    agg.mean.assign(T, 0.0);
    agg.band_low.assign(T, 0.0);
    agg.band_high.assign(T, 0.0);
    for (long t = 0; t < T; ++t) {
        double s = 0.0;
        for (int r = 0; r < reps; ++r) s += outputs[r].traces[i].cumulative[t];
        const double m = s / n;
        double ss = 0.0;
        for (int r = 0; r < reps; ++r) {
            const double d = outputs[r].traces[i].cumulative[t] - m;
            ss += d * d;
        }
        const double sem = reps > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
        agg.mean[t] = m;
        agg.band_low[t] = m - 2.0 * sem;
        agg.band_high[t] = m + 2.0 * sem;
    }
    for (int r = 0; r < reps; ++r) agg.finals.push_back(outputs[r].traces[i].final_regret());
    return agg;
}

ExperimentResult collect(std::vector<RepOutput>& outputs, const std::vector<std::string>& names, long T,
                         bool keep_traces) {
    ExperimentResult result;
    for (std::size_t i = 0; i < names.size(); ++i) result.aggregates.push_back(aggregate_policy(names[i], outputs, i, T));
    for (auto& o : outputs) result.diagnostics.push_back(std::move(o.diag));
    if (keep_traces) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            for (auto& o : outputs) result.traces.push_back(std::move(o.traces[i]));
        }
    }
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads, bool keep_traces) {
    cfg.validate();
    std::vector<RepOutput> outputs =
        parallel_reps<RepOutput>(cfg.run.reps, threads, [&](int rep) { return run_rep(cfg, rep); });
    std::vector<std::string> names;
    for (const auto& ps : cfg.policies) names.push_back(ps.name());
    return collect(outputs, names, cfg.run.T, keep_traces);
}

void LbExperimentConfig::validate() const {
    if (dim < 1 || K < 1) throw ConfigError("lb: dim and K must be >= 1");
    if (T < 1 || reps < 1 || n < 0) throw ConfigError("lb: need T >= 1, reps >= 1, n >= 0");
    if (!(v_true >= 0.0) || !(v_ratio >= 0.0)) throw ConfigError("lb: v_true and v_ratio must be >= 0");
    if (!(a_max > 0.0) || !(theta_norm > 0.0) || !(lam > 0.0) || !(R >= 0.0)) {
        throw ConfigError("lb: a_max, theta_norm and lam must be positive, R non-negative");
    }
    if (policies.empty()) throw ConfigError("lb: no policies");
    for (const auto& p : policies) {
        if (p != "lb_ucb" && p != "lb_offline_ucb") throw ConfigError("lb: unknown policy kind '" + p + "'");
    }
}

ExperimentResult run_lb_experiment(const LbExperimentConfig& cfg, int threads, bool keep_traces) {
    cfg.validate();
    auto one_rep = [&](int rep) {
        CounterRng tr = rep_stream(cfg.seed, rep, Stream::theta);
        Vec theta(cfg.dim);
        for (int i = 0; i < cfg.dim; ++i) theta[i] = tr.normal();
        theta *= cfg.theta_norm / theta.norm();
        CounterRng dr = rep_stream(cfg.seed, rep, Stream::bias_direction);
        Vec dir(cfg.dim);
        for (int i = 0; i < cfg.dim; ++i) dir[i] = dr.normal();
        const Vec theta_prime = theta + cfg.v_true * dir.normalized();
        const LbOfflineData offline = generate_lb_offline(theta_prime, cfg.n, cfg.a_max, cfg.R,
                                                          rep_stream(cfg.seed, rep, Stream::offline_contexts));
        LbConfig lc;
        lc.V = cfg.v_ratio * cfg.v_true;
        lc.lam = cfg.lam;
        lc.eps = cfg.eps;
        lc.T = cfg.T;
        lc.a_max = cfg.a_max;
        lc.param_bound = cfg.theta_norm;
        lc.R = cfg.R;
        const LbEnv env{theta, cfg.K, cfg.a_max, cfg.R};
        RepOutput out;
        out.diag.rep = rep;
        out.diag.v_true = cfg.v_true;
        for (const auto& name : cfg.policies) {
            auto pol = name == "lb_ucb" ? make_lb_ucb(cfg.dim, lc) : make_lb_offline_ucb(cfg.dim, offline, lc);
            RegretTrace t = lb_run(env, *pol, cfg.T, rep_stream(cfg.seed, rep, Stream::actions),
                                   rep_stream(cfg.seed, rep, Stream::online_noise));
            t.policy = name;
            t.rep = rep;
            out.traces.push_back(std::move(t));
        }
        return out;
    };
    std::vector<RepOutput> outputs = parallel_reps<RepOutput>(cfg.reps, threads, one_rep);
    return collect(outputs, cfg.policies, cfg.T, keep_traces);
}

std::vector<SweepRow> bias_sweep(const ExperimentConfig& cfg, const std::vector<double>& v_true_sq_grid,
                                 int threads) {
    if (v_true_sq_grid.empty()) throw ConfigError("sweep: empty grid");
    std::vector<SweepRow> rows;
    for (double v2 : v_true_sq_grid) {
        if (!(v2 >= 0.0)) throw ConfigError("sweep: grid values must be >= 0");
        ExperimentConfig c = cfg;
        c.offline.v_true = std::sqrt(v2);
        const ExperimentResult res = run_experiment(c, threads, false);
        for (const auto& agg : res.aggregates) rows.push_back({agg.policy, v2, agg.mean_final(), agg.std_final()});
    }
    return rows;
}

std::vector<double> parse_sweep_grid(const std::string& spec, long T) {
    static const std::regex power(R"(\s*T\^\{-n/(\d+(?:\.\d+)?)\}\s*:\s*(\d+)\s*\.\.\s*(\d+)\s*)");
    std::smatch m;
    std::vector<double> out;
    if (std::regex_match(spec, m, power)) {
        const double k = std::stod(m[1]);
        const int lo = std::stoi(m[2]);
        const int hi = std::stoi(m[3]);
        if (k <= 0.0 || lo > hi) throw ConfigError("sweep grid: bad range in " + spec);
        for (int n = lo; n <= hi; ++n) out.push_back(std::pow(static_cast<double>(T), -n / k));
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("sweep grid: cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("sweep grid: empty");
    return out;
}

// ---------------------------------------------------------------------------
// Output

void write_trace_csv(std::ostream& os, const std::vector<RegretTrace>& traces) {
    os << "policy,rep,t,instant_regret,cum_regret\n";
    for (const auto& tr : traces) {
        for (long t = 0; t < tr.size(); ++t) {
            os << tr.policy << ',' << tr.rep << ',' << (t + 1) << ',' << fmt_exact(tr.instant[t]) << ','
               << fmt_exact(tr.cumulative[t]) << '\n';
        }
    }
}

void write_aggregate_csv(std::ostream& os, const ExperimentResult& result) {
    os << "policy,t,mean_cum_regret,band_low,band_high\n";
    for (const auto& a : result.aggregates) {
        for (std::size_t t = 0; t < a.mean.size(); ++t) {
            os << a.policy << ',' << (t + 1) << ',' << fmt_exact(a.mean[t]) << ',' << fmt_exact(a.band_low[t]) << ','
               << fmt_exact(a.band_high[t]) << '\n';
        }
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "policy,v_true_sq,mean_final_regret,std_final_regret\n";
    for (const auto& r : rows) {
        os << r.policy << ',' << fmt_exact(r.v_true_sq) << ',' << fmt_exact(r.mean_final) << ',' << fmt_exact(r.std_final)
           << '\n';
    }
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace pricing
