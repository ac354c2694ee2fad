// SPDX-License-Identifier: MIT
#include "pricing/config.hpp"

#include <fstream>
#include <initializer_list>

#include "pricing/errors.hpp"

namespace pricing {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    require_object(j, where);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

long get_integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<long>();
}

template <typename T, typename F>
void read_opt(const json& obj, const char* key, const std::string& where, T& out, F conv) {
    if (obj.contains(key)) out = conv(obj.at(key), where + "." + key);
}

std::array<double, 2> get_range(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [low, high]");
    return {get_number(j[0], where), get_number(j[1], where)};
}

Vec get_vector(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
    Vec v(static_cast<int>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = get_number(j[i], where);
    return v;
}

json range_json(const std::array<double, 2>& r) { return json::array({r[0], r[1]}); }

json vec_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    check_keys(doc, "config", {"problem", "offline", "policies", "run"});
    ExperimentConfig cfg;
    auto num = [](const json& j, const std::string& w) { return get_number(j, w); };
    auto integer = [](const json& j, const std::string& w) { return get_integer(j, w); };

    if (doc.contains("problem")) {
        const json& p = doc.at("problem");
        check_keys(p, "problem",
                   {"d1", "d2", "noise_R", "alpha_range", "beta_range", "x_range", "y_range", "param_slack",
                    "theta_star"});
        auto& pc = cfg.problem;
        long d1 = pc.d1, d2 = pc.d2;
        read_opt(p, "d1", "problem", d1, integer);
        read_opt(p, "d2", "problem", d2, integer);
        pc.d1 = static_cast<int>(d1);
        pc.d2 = static_cast<int>(d2);
        read_opt(p, "noise_R", "problem", pc.noise_R, num);
        read_opt(p, "alpha_range", "problem", pc.alpha_range, get_range);
        read_opt(p, "beta_range", "problem", pc.beta_range, get_range);
        if (p.contains("x_range")) pc.x_range = get_range(p.at("x_range"), "problem.x_range");
        if (p.contains("y_range")) pc.y_range = get_range(p.at("y_range"), "problem.y_range");
        read_opt(p, "param_slack", "problem", pc.param_slack, num);
        if (p.contains("theta_star")) {
            const json& th = p.at("theta_star");
            check_keys(th, "problem.theta_star", {"alpha", "beta"});
            if (!th.contains("alpha") || !th.contains("beta")) {
                throw ConfigError("problem.theta_star: alpha and beta are required");
            }
            pc.theta_star = DemandParams{get_vector(th.at("alpha"), "problem.theta_star.alpha"),
                                         get_vector(th.at("beta"), "problem.theta_star.beta")};
        }
    }

    if (doc.contains("offline")) {
        const json& o = doc.at("offline");
        check_keys(o, "offline", {"n", "price_scheme", "fixed_price", "v_true", "v_true_scale"});
        auto& oc = cfg.offline;
        read_opt(o, "n", "offline", oc.n, integer);
        if (o.contains("price_scheme")) {
            if (!o.at("price_scheme").is_string()) throw ConfigError("offline.price_scheme: expected a string");
            try {
                oc.price_scheme = parse_price_scheme(o.at("price_scheme").get<std::string>());
            } catch (const InvalidInput& e) {
                throw ConfigError(std::string("offline.price_scheme: ") + e.what());
            }
        }
        if (o.contains("fixed_price")) oc.fixed_price = get_number(o.at("fixed_price"), "offline.fixed_price");
        if (o.contains("v_true")) oc.v_true = get_number(o.at("v_true"), "offline.v_true");
        read_opt(o, "v_true_scale", "offline", oc.v_true_scale, num);
    }

    if (doc.contains("policies")) {
        const json& ps = doc.at("policies");
        if (!ps.is_array()) throw ConfigError("policies: expected an array");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::string where = "policies[" + std::to_string(i) + "]";
            const json& j = ps[i];
            check_keys(j, where,
                       {"kind", "label", "v_bound", "v_ratio", "lam", "eps", "restarts", "alpha_exp", "test_scale",
                        "prior_cov_scale", "noise_sigma"});
            if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError(where + ": kind is required");
            PolicySpec spec;
            try {
                spec.kind = parse_policy_kind(j.at("kind").get<std::string>());
            } catch (const InvalidInput& e) {
                throw ConfigError(where + ": " + e.what());
            }
            if (j.contains("label")) {
                if (!j.at("label").is_string()) throw ConfigError(where + ".label: expected a string");
                spec.label = j.at("label").get<std::string>();
                if (spec.label.find_first_of(",\n\"") != std::string::npos) {
                    throw ConfigError(where + ".label: commas, quotes and newlines are not allowed");
                }
            }
            if (j.contains("v_bound")) spec.v_bound = get_number(j.at("v_bound"), where + ".v_bound");
            if (j.contains("v_ratio")) spec.v_ratio = get_number(j.at("v_ratio"), where + ".v_ratio");
            read_opt(j, "lam", where, spec.lam, num);
            read_opt(j, "eps", where, spec.eps, num);
            long restarts = spec.restarts;
            read_opt(j, "restarts", where, restarts, integer);
            spec.restarts = static_cast<int>(restarts);
            read_opt(j, "alpha_exp", where, spec.alpha_exp, num);
            read_opt(j, "test_scale", where, spec.test_scale, num);
            read_opt(j, "prior_cov_scale", where, spec.prior_cov_scale, num);
            if (j.contains("noise_sigma")) spec.noise_sigma = get_number(j.at("noise_sigma"), where + ".noise_sigma");
            cfg.policies.push_back(std::move(spec));
        }
    }

    if (doc.contains("run")) {
        const json& r = doc.at("run");
        check_keys(r, "run", {"T", "reps", "seed", "grid_size", "delta_mc_samples"});
        auto& rc = cfg.run;
        read_opt(r, "T", "run", rc.T, integer);
        long reps = rc.reps, grid = rc.grid_size;
        read_opt(r, "reps", "run", reps, integer);
        read_opt(r, "grid_size", "run", grid, integer);
        rc.reps = static_cast<int>(reps);
        rc.grid_size = static_cast<int>(grid);
        if (r.contains("seed")) {
            if (!r.at("seed").is_number_unsigned()) throw ConfigError("run.seed: expected a non-negative integer");
            rc.seed = r.at("seed").get<std::uint64_t>();
        }
        read_opt(r, "delta_mc_samples", "run", rc.delta_mc_samples, integer);
    }

    try {
        cfg.validate();
        make_spec(cfg.problem);
    } catch (const ConfigError&) {
        throw;
    } catch (const PricingError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json doc;
    const auto& p = cfg.problem;
    json pj = {{"d1", p.d1},
               {"d2", p.d2},
               {"noise_R", p.noise_R},
               {"alpha_range", range_json(p.alpha_range)},
               {"beta_range", range_json(p.beta_range)},
               {"param_slack", p.param_slack}};
    if (p.x_range) pj["x_range"] = range_json(*p.x_range);
    if (p.y_range) pj["y_range"] = range_json(*p.y_range);
    if (p.theta_star) pj["theta_star"] = {{"alpha", vec_json(p.theta_star->alpha)}, {"beta", vec_json(p.theta_star->beta)}};
    doc["problem"] = pj;

    const auto& o = cfg.offline;
    json oj = {{"n", o.n}, {"price_scheme", to_string(o.price_scheme)}, {"v_true_scale", o.v_true_scale}};
    if (o.fixed_price) oj["fixed_price"] = *o.fixed_price;
    if (o.v_true) oj["v_true"] = *o.v_true;
    doc["offline"] = oj;

    json ps = json::array();
    for (const auto& s : cfg.policies) {
        json j = {{"kind", to_string(s.kind)},
                  {"label", s.name()},
                  {"lam", s.lam},
                  {"eps", s.eps},
                  {"restarts", s.restarts},
                  {"alpha_exp", s.alpha_exp},
                  {"test_scale", s.test_scale},
                  {"prior_cov_scale", s.prior_cov_scale}};
        if (s.v_bound) j["v_bound"] = *s.v_bound;
        if (s.v_ratio) j["v_ratio"] = *s.v_ratio;
        if (s.noise_sigma) j["noise_sigma"] = *s.noise_sigma;
        ps.push_back(j);
    }
    doc["policies"] = ps;

    const auto& r = cfg.run;
    doc["run"] = {{"T", r.T},
                  {"reps", r.reps},
                  {"seed", r.seed},
                  {"grid_size", r.grid_size},
                  {"delta_mc_samples", r.delta_mc_samples}};
    return doc;
}

}  // namespace pricing
