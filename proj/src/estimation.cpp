// SPDX-License-Identifier: MIT
#include "pricing/estimation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pricing/errors.hpp"

namespace pricing {

GramState gram_init(double lam, int d1, int d) {
    if (!(lam > 0.0)) throw InvalidInput("gram_init: lambda must be positive");
    if (d < 1 || d1 < 0 || d1 > d) throw InvalidInput("gram_init: bad dimensions");
    GramState s;
    s.sigma = lam * Mat::Identity(d, d);
    s.moment = Vec::Zero(d);
    s.lam = lam;
    s.d1 = d1;
    return s;
}

GramState gram_init(double lam, int d1, const OfflineMoments& offline) {
    const int d = static_cast<int>(offline.moment.size());
    if (offline.gram.rows() != d || offline.gram.cols() != d) {
        throw InvalidInput("gram_init: offline Gram and moment disagree in size");
    }
    GramState s = gram_init(lam, d1, d);
    s.sigma += offline.gram;
    s.moment += offline.moment;
    s.includes_offline = true;
    return s;
}

void gram_update_feature(GramState& state, const Vec& feature, double response) {
    if (feature.size() != state.dim()) throw InvalidInput("gram_update: feature size mismatch");
    // a_i a_j == a_j a_i in floating point, so sigma stays exactly symmetric.
    state.sigma.noalias() += feature * feature.transpose();
    state.moment += response * feature;
    ++state.t;
}

void gram_update(GramState& state, const Context& ctx, double p, double demand) {
    gram_update_feature(state, price_feature(ctx, p), demand);
}

Vec ridge_solve_vec(const GramState& state) {
    Eigen::LLT<Mat> llt(state.sigma);
    if (llt.info() != Eigen::Success) {
        throw NumericError("ridge_solve: Gram matrix is not positive definite");
    }
    Vec theta = llt.solve(state.moment);
    if (!theta.allFinite()) throw NumericError("ridge_solve: non-finite solution");
    return theta;
}

DemandParams ridge_solve(const GramState& state) {
    return DemandParams::from_stacked(ridge_solve_vec(state), state.d1);
}

EigExtremes eig_extremes(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InvalidInput("eig_extremes: need a square matrix");
    if (!m.allFinite()) throw InvalidInput("eig_extremes: non-finite entries");
    const Mat sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eig_extremes: eigensolver failed");
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

}  // namespace pricing
