// SPDX-License-Identifier: MIT
#include "pricing/policies.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "pricing/errors.hpp"

namespace pricing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double default_eps(double eps, long T) {
    if (eps > 0.0) return eps;
    const double t = static_cast<double>(std::max(T, 2L));
    return 1.0 / (t * t);
}

RadiusParams radius_params(double lam, double eps, long T, const ProblemSpec& spec) {
    RadiusParams rp;
    rp.lam = lam;
    rp.eps = default_eps(eps, T);
    rp.d = spec.dim();
    rp.L = spec.feature_bound();
    rp.param_bound = spec.param_bound();
    rp.R = spec.noise_R;
    if (!(rp.eps > 0.0 && rp.eps < 1.0)) throw InvalidInput("policy: eps must lie in (0, 1)");
    return rp;
}

void check_offline(const OfflineSummary& offline, const ProblemSpec& spec) {
    if (offline.d1 != spec.d1 || offline.d2 != spec.d2) {
        throw InvalidInput("policy: offline summary dimensions differ from the problem");
    }
}

// Round-indexed generator for randomized restarts, independent of other draws.
CounterRng round_rng(const CounterRng& base, long round, std::uint64_t tag) {
    return CounterRng(derive_key(base.key(), {static_cast<std::uint64_t>(round), tag}));
}

enum class SetShape { three, two, combined, online };

// Shared optimistic loop: rebuild the set, charge l when it is empty,
// otherwise the optimistic grid price.
class OfuPolicy : public Policy {
public:
    OfuPolicy(PolicyKind kind, SetShape shape, const OfflineSummary* offline, const OfuConfig& cfg,
              const ProblemSpec& spec, CounterRng rng)
        : Policy(spec),
          kind_(kind),
          shape_(shape),
          cfg_(cfg),
          rp_(radius_params(cfg.lam, cfg.eps, cfg.T, spec)),
          box_(NormBox::from_spec(spec)),
          online_(gram_init(cfg.lam, spec.d1, spec.dim())),
          rng_(rng) {
        if (cfg.grid_size < 2) throw InvalidInput("policy: grid_size must be >= 2");
        if (!(cfg.V >= 0.0)) throw InvalidInput("policy: V must be non-negative");
        if (offline) {
            check_offline(*offline, spec);
            combined_ = gram_init(cfg.lam, spec.d1, offline->moments());
            spectrum_ = {offline->lam_min, offline->lam_max};
        }
    }

    PolicyKind kind() const override { return kind_; }
    PolicyMode mode() const override { return greedy_ ? PolicyMode::greedy : PolicyMode::ofu; }
    const ConfidenceSet* last_set() const override { return has_set_ ? &set_ : nullptr; }
    std::optional<double> last_ucb() const override { return last_ucb_; }
    long empty_set_rounds() const override { return empty_rounds_; }

    void set_greedy(const OfflineSummary& offline) {
        greedy_ = true;
        greedy_offline_ = &offline;
    }

protected:
    double do_choose(const Context& ctx) override {
        if (greedy_) return project_price(phat(*greedy_offline_, ctx), spec_);
        set_ = build_set();
        has_set_ = true;
        last_ucb_.reset();
        if (!feasible_point(set_, cfg_.restarts, round_rng(rng_, rounds(), 1))) {
            ++empty_rounds_;
            return spec_.price_low();
        }
        const PriceChoice choice = price_ucb_max(set_, ctx, spec_, cfg_.grid_size);
        last_ucb_ = choice.ucb;
        return choice.price;
    }

    void do_observe(const Context& ctx, double price, double demand) override {
        const Vec a = price_feature(ctx, price);
        gram_update_feature(online_, a, demand);
        if (combined_) gram_update_feature(*combined_, a, demand);
    }

private:
    ConfidenceSet build_set() const {
        switch (shape_) {
            case SetShape::three:
                return co3_set(online_, *combined_, rp_, cfg_.V, spectrum_, box_);
            case SetShape::two: {
                ConfidenceSet s = gco3_set(online_, *combined_, rp_, cfg_.V, spectrum_, box_);
                if (cfg_.ignore_offline_ball) s.ellipsoids.front().radius = kInf;
                return s;
            }
            case SetShape::combined:
                return combined_set(*combined_, rp_, 0.0, spectrum_, box_);
            case SetShape::online:
                break;
        }
        return online_set(online_, rp_, box_);
    }

    PolicyKind kind_;
    SetShape shape_;
    OfuConfig cfg_;
    RadiusParams rp_;
    NormBox box_;
    GramState online_;
    std::optional<GramState> combined_;
    OfflineSpectrum spectrum_;
    CounterRng rng_;

    bool greedy_ = false;
    const OfflineSummary* greedy_offline_ = nullptr;

    ConfidenceSet set_;
    bool has_set_ = false;
    std::optional<double> last_ucb_;
    long empty_rounds_ = 0;

public:
    Co3TestResult test_;
};

class Rco3Policy : public Policy {
public:
    Rco3Policy(const OfflineSummary& offline, const Rco3Config& cfg, const ProblemSpec& spec, CounterRng rng)
        : Policy(spec),
          cfg_(cfg),
          rp_(radius_params(cfg.lam, cfg.eps, cfg.T, spec)),
          box_(NormBox::from_spec(spec)),
          online_(gram_init(cfg.lam, spec.d1, spec.dim())),
          rng_(rng),
          test_length_(cfg.test_length()) {
        check_offline(offline, spec);
        if (cfg.grid_size < 2) throw InvalidInput("policy: grid_size must be >= 2");
        if (test_length_ >= cfg.T) throw ConfigError("rco3: test length must be shorter than the horizon");
        theta_offline_ = ridge_solve_vec(gram_init(cfg.lam, spec.d1, offline.moments()));
        offline_lam_min_ = offline.lam_min;
    }

    PolicyKind kind() const override { return PolicyKind::rco3; }
    PolicyMode mode() const override { return mode_; }
    const ConfidenceSet* last_set() const override { return has_set_ ? &set_ : nullptr; }
    std::optional<double> last_ucb() const override { return last_ucb_; }
    long empty_set_rounds() const override { return empty_rounds_; }

protected:
    double do_choose(const Context& ctx) override {
        last_ucb_.reset();
        switch (mode_) {
            case PolicyMode::testing:
                return rng_.bernoulli() ? spec_.price_high() : spec_.price_low();
            case PolicyMode::greedy: {
                const DemandParams th = DemandParams::from_stacked(theta_offline_, spec_.d1);
                return best_price_on_interval(th.alpha.dot(ctx.x), th.beta.dot(ctx.y), spec_);
            }
            default:
                break;
        }
        set_ = online_set(online_, rp_, box_);
        has_set_ = true;
        if (!feasible_point(set_, 4, round_rng(rng_, rounds(), 1))) {
            ++empty_rounds_;
            return spec_.price_low();
        }
        const PriceChoice choice = price_ucb_max(set_, ctx, spec_, cfg_.grid_size);
        last_ucb_ = choice.ucb;
        return choice.price;
    }

    void do_observe(const Context& ctx, double price, double demand) override {
        gram_update(online_, ctx, price, demand);
        if (mode_ == PolicyMode::testing && online_.t >= test_length_) decide();
    }

private:
    void decide() {
        const Vec theta_test = ridge_solve_vec(online_);
        const Mat test_gram = online_.sigma - online_.lam * Mat::Identity(online_.dim(), online_.dim());
        const double test_lam_min = std::max(eig_extremes(test_gram).min, 0.0);
        const double f = robust_test_width(rp_, offline_lam_min_, test_lam_min);
        mode_ = (theta_offline_ - theta_test).norm() <= 2.0 * f ? PolicyMode::greedy : PolicyMode::online;
    }

    Rco3Config cfg_;
    RadiusParams rp_;
    NormBox box_;
    GramState online_;
    CounterRng rng_;
    long test_length_;
    Vec theta_offline_;
    double offline_lam_min_ = 0.0;
    PolicyMode mode_ = PolicyMode::testing;

    ConfidenceSet set_;
    bool has_set_ = false;
    std::optional<double> last_ucb_;
    long empty_rounds_ = 0;
};

// Conjugate Gaussian posterior: precision Sigma / sigma^2 with
// Sigma = (sigma^2 / s) I (+ offline Gram) + online outer products.
class TsPolicy : public Policy {
public:
    TsPolicy(PolicyKind kind, const Vec& prior_mean, const OfflineSummary* offline, const TsConfig& cfg,
             const ProblemSpec& spec, CounterRng rng)
        : Policy(spec), kind_(kind), cfg_(cfg), prior_mean_(prior_mean), rng_(rng) {
        if (prior_mean.size() != spec.dim()) throw InvalidInput("ts: prior mean has the wrong dimension");
        if (!(cfg.noise_sigma > 0.0)) throw InvalidInput("ts: noise_sigma must be positive");
        if (!(cfg.prior_cov_scale >= 0.0)) throw InvalidInput("ts: prior_cov_scale must be non-negative");
        pinned_ = cfg.prior_cov_scale == 0.0;
        if (pinned_) return;
        const double lam = cfg.noise_sigma * cfg.noise_sigma / cfg.prior_cov_scale;
        if (offline) {
            check_offline(*offline, spec);
            gram_ = gram_init(lam, spec.d1, offline->moments());
        } else {
            gram_ = gram_init(lam, spec.d1, spec.dim());
        }
        gram_.moment += lam * prior_mean;
    }

    PolicyKind kind() const override { return kind_; }

protected:
    double do_choose(const Context& ctx) override {
        Vec theta;
        if (pinned_) {
            theta = prior_mean_;
        } else {
            Eigen::LLT<Mat> llt(gram_.sigma);
            if (llt.info() != Eigen::Success) throw NumericError("ts: posterior precision is not PD");
            Vec z(gram_.dim());
            for (int i = 0; i < z.size(); ++i) z[i] = rng_.normal();
            theta = llt.solve(gram_.moment) + cfg_.noise_sigma * Vec(llt.matrixU().solve(z));
        }
        const int d1 = spec_.d1;
        const double b = theta.tail(spec_.d2).dot(ctx.y);
        if (b >= 0.0) return spec_.price_high();
        return project_price(-theta.head(d1).dot(ctx.x) / (2.0 * b), spec_);
    }

    void do_observe(const Context& ctx, double price, double demand) override {
        if (!pinned_) gram_update(gram_, ctx, price, demand);
    }

private:
    PolicyKind kind_;
    TsConfig cfg_;
    Vec prior_mean_;
    CounterRng rng_;
    bool pinned_ = false;
    GramState gram_;
};

class GreedyOfflinePolicy : public Policy {
public:
    GreedyOfflinePolicy(const OfflineSummary& offline, const ProblemSpec& spec) : Policy(spec), offline_(offline) {
        check_offline(offline, spec);
        if (spec.d2 != 1) throw UnsupportedDimension("greedy_offline: scalar elasticity feature required");
        if (!offline.A_hat) throw InvalidInput("greedy_offline: offline price rule unavailable");
    }
    PolicyKind kind() const override { return PolicyKind::greedy_offline; }
    PolicyMode mode() const override { return PolicyMode::greedy; }

protected:
    double do_choose(const Context& ctx) override { return project_price(phat(offline_, ctx), spec_); }
    void do_observe(const Context&, double, double) override {}

private:
    const OfflineSummary& offline_;
};

class ClairvoyantPolicy : public Policy {
public:
    ClairvoyantPolicy(const DemandParams& theta, const ProblemSpec& spec) : Policy(spec), theta_(theta) {}
    PolicyKind kind() const override { return PolicyKind::clairvoyant; }
    PolicyMode mode() const override { return PolicyMode::greedy; }

protected:
    double do_choose(const Context& ctx) override { return optimal_price(theta_, ctx, spec_); }
    void do_observe(const Context&, double, double) override {}

private:
    DemandParams theta_;
};

}  // namespace

// ---------------------------------------------------------------------------

PolicyKind parse_policy_kind(std::string_view name) {
    if (name == "co3") return PolicyKind::co3;
    if (name == "gco3") return PolicyKind::gco3;
    if (name == "rco3") return PolicyKind::rco3;
    if (name == "ucb") return PolicyKind::ucb;
    if (name == "ucb_offline") return PolicyKind::ucb_offline;
    if (name == "ts") return PolicyKind::ts;
    if (name == "ts_offline") return PolicyKind::ts_offline;
    if (name == "greedy_offline") return PolicyKind::greedy_offline;
    if (name == "clairvoyant") return PolicyKind::clairvoyant;
    throw InvalidInput("unknown policy kind: " + std::string(name));
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::co3: return "co3";
        case PolicyKind::gco3: return "gco3";
        case PolicyKind::rco3: return "rco3";
        case PolicyKind::ucb: return "ucb";
        case PolicyKind::ucb_offline: return "ucb_offline";
        case PolicyKind::ts: return "ts";
        case PolicyKind::ts_offline: return "ts_offline";
        case PolicyKind::greedy_offline: return "greedy_offline";
        case PolicyKind::clairvoyant: return "clairvoyant";
    }
    return "?";
}

bool uses_offline(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::co3:
        case PolicyKind::gco3:
        case PolicyKind::rco3:
        case PolicyKind::ucb_offline:
        case PolicyKind::ts_offline:
        case PolicyKind::greedy_offline:
            return true;
        default:
            return false;
    }
}

std::string to_string(PolicyMode mode) {
    switch (mode) {
        case PolicyMode::ofu: return "ofu";
        case PolicyMode::greedy: return "greedy";
        case PolicyMode::testing: return "testing";
        case PolicyMode::online: return "online";
    }
    return "?";
}

long Rco3Config::test_length() const {
    if (!(alpha_exp > 0.0 && alpha_exp < 0.5)) throw ConfigError("rco3: alpha_exp must lie in (0, 1/2)");
    if (!(test_scale > 0.0)) throw ConfigError("rco3: test_scale must be positive");
    return static_cast<long>(std::ceil(test_scale * std::pow(static_cast<double>(T), alpha_exp)));
}

double Policy::choose_price(const Context& ctx) {
    if (pending_) throw ContractViolation("choose_price called twice without observe");
    if (ctx.x.size() != spec_.d1 || ctx.y.size() != spec_.d2) throw InvalidInput("policy: context dimension mismatch");
    const double p = do_choose(ctx);
    if (!std::isfinite(p)) throw NumericError("policy produced a non-finite price");
    pending_ = project_price(p, spec_);
    return *pending_;
}

void Policy::observe(const Context& ctx, double price, double demand) {
    if (!pending_) throw ContractViolation("observe called without a pending price");
    if (price != *pending_) throw ContractViolation("observe: price does not echo the charged price");
    do_observe(ctx, price, demand);
    pending_.reset();
    ++rounds_;
}

Co3TestResult co3_offline_test(const OfflineSummary& offline, const OfflineDataset& data, const OfuConfig& cfg,
                               const ProblemSpec& spec, CounterRng rng) {
    if (spec.d2 != 1) throw UnsupportedDimension("co3: scalar elasticity feature required (use gco3)");
    check_offline(offline, spec);
    Co3TestResult r;
    const double inv_lam = offline.lam_min > 0.0 ? 1.0 / offline.lam_min : kInf;
    r.bias_term = std::max(cfg.V * cfg.V, inv_lam);
    const double n = static_cast<double>(offline.n);
    r.threshold = n * spec.x_max * spec.x_max * spec.y_max * spec.y_max /
                  (spec.y_min * spec.y_min * spec.lambda_min_Exx) * r.bias_term;
    const double horizon = std::pow(static_cast<double>(cfg.T), -0.5);
    if (!offline.A_hat || offline.n == 0 || !(r.bias_term <= horizon)) return r;

    std::vector<Context> contexts;
    std::vector<double> prices;
    contexts.reserve(data.rows.size());
    prices.reserve(data.rows.size());
    for (long i = 0; i < data.size(); ++i) {
        contexts.push_back(data.context(i));
        prices.push_back(phat(offline, contexts.back()));
    }
    const RadiusParams rp = radius_params(cfg.lam, cfg.eps, cfg.T, spec);
    const GramState online = gram_init(cfg.lam, spec.d1, spec.dim());
    const GramState combined = gram_init(cfg.lam, spec.d1, offline.moments());
    const ConfidenceSet c0 =
        co3_set(online, combined, rp, cfg.V, {offline.lam_min, offline.lam_max}, NormBox::from_spec(spec));
    FitOptions opts;
    opts.restarts = std::max(cfg.restarts, 1);
    r.fit = min_price_fit(c0, PriceFitObjective(contexts, prices), opts, rng);
    r.greedy = r.fit && *r.fit <= r.threshold;
    return r;
}

std::unique_ptr<Policy> make_co3(const OfflineSummary& offline, const OfflineDataset& data, const OfuConfig& cfg,
                                 const ProblemSpec& spec, CounterRng rng) {
    const Co3TestResult test = co3_offline_test(offline, data, cfg, spec, round_rng(rng, -1, 2));
    auto p = std::make_unique<OfuPolicy>(PolicyKind::co3, SetShape::three, &offline, cfg, spec, rng);
    p->test_ = test;
    if (test.greedy) p->set_greedy(offline);
    return p;
}

const Co3TestResult& co3_test_result(const Policy& policy) {
    const auto* p = dynamic_cast<const OfuPolicy*>(&policy);
    if (!p || p->kind() != PolicyKind::co3) throw InvalidInput("co3_test_result: not a co3 policy");
    return p->test_;
}

std::unique_ptr<Policy> make_gco3(const OfflineSummary& offline, const OfuConfig& cfg, const ProblemSpec& spec,
                                  CounterRng rng) {
    return std::make_unique<OfuPolicy>(PolicyKind::gco3, SetShape::two, &offline, cfg, spec, rng);
}

std::unique_ptr<Policy> make_rco3(const OfflineSummary& offline, const Rco3Config& cfg, const ProblemSpec& spec,
                                  CounterRng rng) {
    return std::make_unique<Rco3Policy>(offline, cfg, spec, rng);
}

std::unique_ptr<Policy> make_ucb(const OfuConfig& cfg, const ProblemSpec& spec, CounterRng rng) {
    return std::make_unique<OfuPolicy>(PolicyKind::ucb, SetShape::online, nullptr, cfg, spec, rng);
}

std::unique_ptr<Policy> make_ucb_offline(const OfflineSummary& offline, const OfuConfig& cfg,
                                         const ProblemSpec& spec, CounterRng rng) {
    // Without offline rows the combined ellipsoid is the online one; keep the
    // online radius so the two baselines coincide.
    const SetShape shape = offline.n == 0 ? SetShape::online : SetShape::combined;
    return std::make_unique<OfuPolicy>(PolicyKind::ucb_offline, shape, &offline, cfg, spec, rng);
}

std::unique_ptr<Policy> make_ts(const Vec& prior_mean, const TsConfig& cfg, const ProblemSpec& spec,
                                CounterRng rng) {
    return std::make_unique<TsPolicy>(PolicyKind::ts, prior_mean, nullptr, cfg, spec, rng);
}

std::unique_ptr<Policy> make_ts_offline(const OfflineSummary& offline, const TsConfig& cfg,
                                        const ProblemSpec& spec, CounterRng rng) {
    return std::make_unique<TsPolicy>(PolicyKind::ts_offline, Vec::Zero(spec.dim()), &offline, cfg, spec, rng);
}

std::unique_ptr<Policy> make_greedy_offline(const OfflineSummary& offline, const ProblemSpec& spec) {
    return std::make_unique<GreedyOfflinePolicy>(offline, spec);
}

std::unique_ptr<Policy> make_clairvoyant(const DemandParams& theta_star, const ProblemSpec& spec) {
    return std::make_unique<ClairvoyantPolicy>(theta_star, spec);
}

}  // namespace pricing
