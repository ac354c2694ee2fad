// SPDX-License-Identifier: MIT
//
// pricing_lab: run experiments, bias sweeps and the canned figure recipes.
#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "pricing/config.hpp"
#include "pricing/errors.hpp"

namespace fs = std::filesystem;
using namespace pricing;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("PRICING_LAB_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("PRICING_LAB_THREADS is not a positive integer: ") + env);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << bytes;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

json diagnostics_json(const ExperimentConfig& cfg, const ExperimentResult& res) {
    json reps = json::array();
    for (const auto& d : res.diagnostics) {
        json j = {{"rep", d.rep}, {"v_true", d.v_true}, {"lam_min_sigma_hat", d.lam_min},
                  {"dispersion_c", d.dispersion_c}};
        if (d.delta_sq) j["delta_sq"] = {{"mean", d.delta_sq->mean}, {"std_error", d.delta_sq->std_error}};
        json modes = json::object();
        json empty = json::object();
        for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
            modes[cfg.policies[i].name()] = d.modes[i];
            empty[cfg.policies[i].name()] = d.empty_set_rounds[i];
        }
        j["final_modes"] = modes;
        j["empty_set_rounds"] = empty;
        reps.push_back(j);
    }
    return reps;
}

json bound_ratios(const ExperimentConfig& cfg) {
    json out = json::object();
    const double vt = cfg.v_true();
    for (const auto& p : cfg.policies) {
        if (p.v_ratio) out[p.name()] = {{"v_ratio", *p.v_ratio}, {"v_bound", *p.v_ratio * vt}};
        if (p.v_bound) out[p.name()] = {{"v_bound", *p.v_bound}, {"v_ratio", vt > 0 ? *p.v_bound / vt : 0.0}};
    }
    return out;
}

int do_run(const ExperimentConfig& cfg, const fs::path& out, int threads) {
    fs::create_directories(out);
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult res = run_experiment(cfg, threads, true);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ostringstream trace, agg, sweep;
    write_trace_csv(trace, res.traces);
    write_aggregate_csv(agg, res);
    std::vector<SweepRow> rows;
    for (const auto& a : res.aggregates) rows.push_back({a.policy, cfg.v_true() * cfg.v_true(), a.mean_final(), a.std_final()});
    write_sweep_csv(sweep, rows);
    write_file(out / "trace.csv", trace.str());
    write_file(out / "aggregate.csv", agg.str());
    write_file(out / "sweep.csv", sweep.str());

    std::uint64_t digest = fnv1a(trace.str());
    digest = fnv1a(agg.str(), digest);
    digest = fnv1a(sweep.str(), digest);
    json manifest = {{"config", to_json(cfg)},
                     {"v_true", cfg.v_true()},
                     {"bias_bounds", bound_ratios(cfg)},
                     {"replications", diagnostics_json(cfg, res)},
                     {"digest", hex(digest)}};
    write_file(out / "manifest.json", manifest.dump(2) + "\n");

    for (const auto& a : res.aggregates) {
        std::cout << a.policy << ": mean final regret " << a.mean_final() << " (std " << a.std_final() << ")\n";
    }
    std::cout << "digest " << hex(digest) << ", " << secs << " s\n";
    return 0;
}

int do_sweep(const ExperimentConfig& cfg, const std::vector<double>& grid, const std::string& grid_spec,
             const fs::path& out, int threads) {
    fs::create_directories(out);
    const auto start = std::chrono::steady_clock::now();
    const std::vector<SweepRow> rows = bias_sweep(cfg, grid, threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream sweep;
    write_sweep_csv(sweep, rows);
    write_file(out / "sweep.csv", sweep.str());
    json manifest = {{"config", to_json(cfg)}, {"grid", grid_spec}, {"grid_values", grid},
                     {"digest", hex(fnv1a(sweep.str()))}};
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    for (const auto& r : rows) {
        std::cout << r.policy << " v_true_sq=" << r.v_true_sq << " mean=" << r.mean_final << " std=" << r.std_final
                  << "\n";
    }
    std::cout << secs << " s\n";
    return 0;
}

int do_lb(const LbExperimentConfig& cfg, const fs::path& out, int threads) {
    fs::create_directories(out);
    const ExperimentResult res = run_lb_experiment(cfg, threads, true);
    std::ostringstream trace, agg;
    write_trace_csv(trace, res.traces);
    write_aggregate_csv(agg, res);
    write_file(out / "trace.csv", trace.str());
    write_file(out / "aggregate.csv", agg.str());
    const std::uint64_t digest = fnv1a(agg.str(), fnv1a(trace.str()));
    json manifest = {{"config",
                      {{"dim", cfg.dim}, {"K", cfg.K}, {"T", cfg.T}, {"reps", cfg.reps}, {"n", cfg.n},
                       {"v_true", cfg.v_true}, {"v_ratio", cfg.v_ratio}, {"a_max", cfg.a_max},
                       {"theta_norm", cfg.theta_norm}, {"R", cfg.R}, {"lam", cfg.lam}, {"seed", cfg.seed},
                       {"policies", cfg.policies}}},
                     {"digest", hex(digest)}};
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    for (const auto& a : res.aggregates) {
        std::cout << a.policy << ": mean final regret " << a.mean_final() << " (std " << a.std_final() << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contextual dynamic pricing simulation lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", grid_spec, figure;
    std::uint64_t seed = 0;
    int threads = 0;

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--config", config_path, "Experiment JSON")->required();
    run->add_option("--out", out_dir, "Output directory");
    auto* seed_opt = run->add_option("--seed", seed, "Override run.seed");
    run->add_option("--threads", threads, "Worker threads");

    auto* sweep = app.add_subcommand("sweep", "Bias sweep over V_true^2");
    sweep->add_option("--config", config_path, "Experiment JSON")->required();
    sweep->add_option("--grid", grid_spec, "Grid: 'T^{-n/5}:0..9' or comma-separated values")->required();
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--threads", threads, "Worker threads");

    auto* repro = app.add_subcommand("repro", "Canned figure experiments");
    repro->add_option("figure", figure, "fig2a, fig2b or fig2c")->required();
    repro->add_option("--out", out_dir, "Output directory");
    repro->add_option("--threads", threads, "Worker threads");

    LbExperimentConfig lb_cfg;
    std::string lb_policies = "lb_ucb,lb_offline_ucb";
    auto* lb = app.add_subcommand("lb", "Linear bandit with biased offline data");
    lb->add_option("--dim", lb_cfg.dim, "Parameter dimension");
    lb->add_option("--actions", lb_cfg.K, "Actions per round");
    lb->add_option("--T", lb_cfg.T, "Horizon");
    lb->add_option("--reps", lb_cfg.reps, "Replications");
    lb->add_option("--n", lb_cfg.n, "Offline rows");
    lb->add_option("--v-true", lb_cfg.v_true, "Offline bias");
    lb->add_option("--v-ratio", lb_cfg.v_ratio, "Bias bound as a multiple of v-true");
    lb->add_option("--noise", lb_cfg.R, "Reward noise std");
    lb->add_option("--seed", lb_cfg.seed, "Master seed");
    lb->add_option("--policies", lb_policies, "Comma-separated: lb_ucb, lb_offline_ucb");
    lb->add_option("--out", out_dir, "Output directory");
    lb->add_option("--threads", threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const int n_threads = resolve_threads(threads);
        if (run->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            if (*seed_opt) cfg.run.seed = seed;
            return do_run(cfg, out_dir, n_threads);
        }
        if (lb->parsed()) {
            lb_cfg.policies.clear();
            std::stringstream ss(lb_policies);
            for (std::string item; std::getline(ss, item, ',');) lb_cfg.policies.push_back(item);
            return do_lb(lb_cfg, out_dir, n_threads);
        }
        if (sweep->parsed()) {
            const ExperimentConfig cfg = load_config(config_path);
            return do_sweep(cfg, parse_sweep_grid(grid_spec, cfg.run.T), grid_spec, out_dir, n_threads);
        }
        const ExperimentConfig cfg = repro_config(figure);
        if (figure == "fig2c") {
            const std::string g = repro_sweep_grid();
            return do_sweep(cfg, parse_sweep_grid(g, cfg.run.T), g, out_dir, n_threads);
        }
        return do_run(cfg, out_dir, n_threads);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
