// SPDX-License-Identifier: MIT
#include "pricing/offline.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "pricing/errors.hpp"

namespace pricing {

OfflineSummary empty_summary(int d1, int d2) {
    OfflineSummary s;
    s.d1 = d1;
    s.d2 = d2;
    s.sigma_hat = Mat::Zero(d1 + d2, d1 + d2);
    s.moment = Vec::Zero(d1 + d2);
    return s;
}

OfflineSummary build_summary(const OfflineDataset& data) {
    if (data.size() < 1) throw InvalidInput("build_summary: need at least one row");
    const int d1 = data.d1;
    const int d = data.d1 + data.d2;

    Mat features(data.size(), d);
    Vec demand(data.size());
    for (long n = 0; n < data.size(); ++n) {
        const OfflineRow& r = data.rows[n];
        if (r.x.size() != d1 || r.y.size() != data.d2) {
            throw InvalidInput("build_summary: row dimension mismatch");
        }
        features.row(n).head(d1) = r.x.transpose();
        features.row(n).tail(data.d2) = r.p * r.y.transpose();
        demand[n] = r.demand;
    }

    OfflineSummary s = empty_summary(d1, data.d2);
    s.n = data.size();
    s.sigma_hat.noalias() = features.transpose() * features;
    s.moment.noalias() = features.transpose() * demand;

    const EigExtremes whole = eig_extremes(s.sigma_hat);
    s.lam_min = whole.min;
    s.lam_max = whole.max;

    const Mat sxx = s.sigma_hat.topLeftCorner(d1, d1);
    const EigExtremes xx = eig_extremes(sxx);
    s.dispersion_c = std::max(xx.min, 0.0) / static_cast<double>(s.n);

    if (data.d2 == 1) {
        // Treat Sigma_xx as singular below a relative eigenvalue floor.
        const bool invertible = xx.max > 0.0 && xx.min > 1e-12 * xx.max;
        if (invertible) {
            Eigen::LLT<Mat> llt(sxx);
            if (llt.info() == Eigen::Success) {
                s.A_hat = llt.solve(s.sigma_hat.topRightCorner(d1, 1)).eval();
            }
        }
    }
    return s;
}

double phat(const OfflineSummary& summary, const Context& ctx) {
    if (summary.d2 != 1 || ctx.y.size() != 1) {
        throw UnsupportedDimension("phat: the offline price rule needs a scalar elasticity feature");
    }
    if (!summary.A_hat) throw InvalidInput("phat: A_hat unavailable (singular Sigma_xx)");
    if (ctx.x.size() != summary.A_hat->size()) throw InvalidInput("phat: dimension mismatch");
    return summary.A_hat->dot(ctx.x) / ctx.y[0];
}

DeltaEstimate estimate_delta_sq(const OfflineSummary& summary, const DemandParams& theta_star,
                                const ContextSampler& sampler, long samples, CounterRng rng) {
    if (samples < 1) throw InvalidInput("estimate_delta_sq: need at least one sample");
    // Welford accumulation keeps the standard error accurate for tiny deltas.
    double mean = 0.0;
    double m2 = 0.0;
    for (long k = 0; k < samples; ++k) {
        const Context ctx = sampler.sample(rng);
        const double elasticity = theta_star.beta.dot(ctx.y);
        if (!(elasticity < 0.0)) {
            throw DegenerateElasticity("estimate_delta_sq: beta^T y must be negative");
        }
        const double p_star = -theta_star.alpha.dot(ctx.x) / (2.0 * elasticity);
        const double gap = phat(summary, ctx) - p_star;
        const double v = gap * gap;
        const double delta = v - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (v - mean);
    }
    DeltaEstimate est;
    est.mean = mean;
    est.samples = samples;
    if (samples > 1) {
        const double var = m2 / static_cast<double>(samples - 1);
        est.std_error = std::sqrt(var / static_cast<double>(samples));
    }
    return est;
}

static bool inside_norm_balls(const DemandParams& t, const ProblemSpec& spec) {
    return t.alpha.norm() <= spec.alpha_max && t.beta.norm() <= spec.beta_max;
}

DemandParams make_biased_params(const DemandParams& theta_star, double v_true, const Vec& direction,
                                const ProblemSpec& spec) {
    if (!(v_true >= 0.0) || !std::isfinite(v_true)) {
        throw InvalidInput("make_biased_params: v_true must be finite and >= 0");
    }
    if (direction.size() != theta_star.dim()) {
        throw InvalidInput("make_biased_params: direction has wrong size");
    }
    if (v_true == 0.0) return theta_star;
    const double norm = direction.norm();
    if (!(norm > 0.0)) throw InvalidInput("make_biased_params: zero direction");

    const int d1 = theta_star.d1();
    const Vec u = direction / norm;
    const Vec base = theta_star.stacked();

    // Candidate directions in order of preference: as given, reflected, then
    // each block reflected on its own, and finally toward the origin.
    std::vector<Vec> candidates;
    candidates.push_back(u);
    candidates.push_back(-u);
    Vec flip_beta = u;
    flip_beta.tail(theta_star.d2()) *= -1.0;
    candidates.push_back(flip_beta);
    candidates.push_back(-flip_beta);
    if (base.norm() > 0.0) candidates.push_back(-base / base.norm());

    for (const Vec& c : candidates) {
        DemandParams shifted = DemandParams::from_stacked(base + v_true * c, d1);
        if (inside_norm_balls(shifted, spec)) return shifted;
    }
    throw InfeasibleBias("make_biased_params: no parameter at the requested distance stays inside the "
                         "parameter set");
}

PriceScheme parse_price_scheme(const std::string& name) {
    if (name == "uniform") return PriceScheme::uniform;
    if (name == "fixed") return PriceScheme::fixed;
    if (name == "two_point") return PriceScheme::two_point;
    throw ConfigError("unknown price scheme '" + name + "'");
}

std::string to_string(PriceScheme scheme) {
    switch (scheme) {
        case PriceScheme::uniform: return "uniform";
        case PriceScheme::fixed: return "fixed";
        case PriceScheme::two_point: return "two_point";
    }
    return "uniform";
}

OfflineDataset generate_offline(const DemandParams& theta_prime, const ProblemSpec& spec,
                                const OfflineGenerator& gen, const ContextSampler& sampler,
                                OfflineStreams streams) {
    if (gen.n < 0) throw InvalidInput("generate_offline: negative N");
    const double l = spec.price_low();
    const double u = spec.price_high();
    const double fixed = gen.fixed_price.value_or(0.5 * (l + u));

    OfflineDataset data;
    data.d1 = sampler.d1;
    data.d2 = sampler.d2;
    data.rows.reserve(gen.n);
    for (long n = 0; n < gen.n; ++n) {
        Context ctx = sampler.sample(streams.contexts);
        double p = fixed;
        switch (gen.scheme) {
            case PriceScheme::uniform: p = streams.prices.uniform(l, u); break;
            case PriceScheme::two_point: p = streams.prices.bernoulli() ? u : l; break;
            case PriceScheme::fixed: break;
        }
        double demand = mean_demand(theta_prime, p, ctx);
        if (spec.noise_R > 0.0) demand += spec.noise_R * streams.noise.normal();
        data.rows.push_back(OfflineRow{std::move(ctx.x), std::move(ctx.y), p, demand});
    }
    return data;
}

static void put_number(std::ostream& os, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

void write_offline_csv(std::ostream& os, const OfflineDataset& data) {
    for (int i = 0; i < data.d1; ++i) os << 'x' << (i + 1) << ',';
    for (int i = 0; i < data.d2; ++i) os << 'y' << (i + 1) << ',';
    os << "p,D\n";
    for (const OfflineRow& r : data.rows) {
        for (int i = 0; i < data.d1; ++i) {
            put_number(os, r.x[i]);
            os << ',';
        }
        for (int i = 0; i < data.d2; ++i) {
            put_number(os, r.y[i]);
            os << ',';
        }
        put_number(os, r.p);
        os << ',';
        put_number(os, r.demand);
        os << '\n';
    }
}

static std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

static double parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw InvalidInput("offline csv: bad number '" + s + "'");
    return v;
}

OfflineDataset read_offline_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidInput("offline csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);
    OfflineDataset data;
    for (const auto& h : header) {
        if (!h.empty() && h[0] == 'x') ++data.d1;
        if (!h.empty() && h[0] == 'y') ++data.d2;
    }
    const std::size_t width = static_cast<std::size_t>(data.d1 + data.d2 + 2);
    if (header.size() != width || header[width - 2] != "p" || header[width - 1] != "D" ||
        data.d1 < 1 || data.d2 < 1) {
        throw InvalidInput("offline csv: header must be x1..xd1,y1..yd2,p,D");
    }
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != width) throw InvalidInput("offline csv: wrong number of fields");
        OfflineRow r{Vec(data.d1), Vec(data.d2), 0.0, 0.0};
        for (int i = 0; i < data.d1; ++i) r.x[i] = parse_number(cells[i]);
        for (int i = 0; i < data.d2; ++i) r.y[i] = parse_number(cells[data.d1 + i]);
        r.p = parse_number(cells[width - 2]);
        r.demand = parse_number(cells[width - 1]);
        data.rows.push_back(std::move(r));
    }
    return data;
}

}  // namespace pricing
