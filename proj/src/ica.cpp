#include "r1nrsfm/ica.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace r1nrsfm {

std::string to_string(IcaContrast c) {
    return c == IcaContrast::LogCosh ? "logcosh" : "cubic";
}

IcaContrast ica_contrast_from_string(const std::string& s) {
    if (s == "logcosh") return IcaContrast::LogCosh;
    if (s == "cubic") return IcaContrast::Cubic;
    throw std::invalid_argument("unknown contrast '" + s + "' (expected logcosh or cubic)");
}

namespace {

/* W <- (W W^T)^{-1/2} W. Throws when W has numerically dependent rows. */
Eigen::MatrixXd symmetric_orth(const Eigen::MatrixXd& W) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W * W.transpose());
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double evMax = ev(ev.size() - 1);
    if (evMax <= 0.0 || ev(0) <= 1e-24 * evMax)
        throw std::domain_error("fastica: update matrix became rank-deficient");
    return es.eigenvectors() *
           ev.cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose() * W;
}

/* One raw symmetric fixed-point step (before re-orthogonalization):
 * row k <- E[x g(w_k x)] - E[g'(w_k x)] w_k, expectations over samples. */
Eigen::MatrixXd fixed_point_update(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                                   IcaContrast contrast) {
    const double J = static_cast<double>(X.cols());
    const Eigen::ArrayXXd Y = (W * X).array();
    Eigen::ArrayXXd GY, GpY;
    if (contrast == IcaContrast::LogCosh) {
        GY = Y.tanh();
        GpY = 1.0 - GY.square();
    } else {
        GY = Y.cube();
        GpY = 3.0 * Y.square();
    }
    return GY.matrix() * X.transpose() / J -
           GpY.rowwise().mean().matrix().asDiagonal() * W;
}

/* Fixed asymmetric perturbation of the identity, orthogonalized. A plain
 * identity start is itself a fixed point of the symmetric update on
 * symmetric inputs; the perturbation nudges it off while staying
 * deterministic. */
Eigen::MatrixXd initial_unmixing(int K) {
    Eigen::MatrixXd W0 = Eigen::MatrixXd::Identity(K, K);
    for (int p = 0; p < K; ++p)
        for (int q = 0; q < K; ++q) W0(p, q) += 0.01 * std::sin(static_cast<double>(p + 2 * q));
    return symmetric_orth(W0);
}

int argmax_abs_row(const Eigen::MatrixXd& M, int row) {
    int best = 0;
    double bestAbs = std::abs(M(row, 0));
    for (int c = 1; c < M.cols(); ++c) {
        const double a = std::abs(M(row, c));
        if (a > bestAbs) {
            bestAbs = a;
            best = c;
        }
    }
    return best;
}

/* Fix row signs (largest-magnitude entry positive) and sort rows by the
 * column of that entry so separated sources come out in a stable order. */
Eigen::MatrixXd canonicalize_rows(Eigen::MatrixXd G) {
    const int K = static_cast<int>(G.rows());
    std::vector<int> pivot(K);
    for (int r = 0; r < K; ++r) {
        pivot[r] = argmax_abs_row(G, r);
        if (G(r, pivot[r]) < 0.0) G.row(r) = -G.row(r);
    }
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return pivot[a] < pivot[b]; });
    Eigen::MatrixXd out(K, G.cols());
    for (int r = 0; r < K; ++r) out.row(r) = G.row(order[r]);
    return out;
}

}  // namespace

IcaResult fastica_orthogonal(const Eigen::MatrixXd& Bprime, const IcaConfig& cfg) {
    if (Bprime.size() == 0) throw std::invalid_argument("fastica: empty input");
    if (!Bprime.allFinite()) throw std::invalid_argument("fastica: non-finite entries");
    const int K = static_cast<int>(Bprime.rows());
    const int J = static_cast<int>(Bprime.cols());
    if (K > J) throw std::invalid_argument("fastica: more rows than samples");
    if (cfg.tol <= 0.0 || cfg.maxIters < 1)
        throw std::invalid_argument("fastica: bad config");

    IcaResult res;
    res.G = Eigen::MatrixXd::Identity(K, K);

    Eigen::MatrixXd X = Bprime;
    if (cfg.centerRows) X = X.colwise() - X.rowwise().mean();

    /* Linear dependence makes both whitening and separation meaningless. */
    {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(X);
        const Eigen::VectorXd& sv = svd.singularValues();
        if (sv(0) == 0.0 || sv(K - 1) <= 1e-12 * sv(0))
            throw std::domain_error("fastica: rows are linearly dependent");
    }

    const Eigen::MatrixXd Cw =
        X * X.transpose() / static_cast<double>(J);
    res.diagnostics.whitenessDeviation =
        (Cw - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff();

    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(K, K);
    if (res.diagnostics.whitenessDeviation > 1e-3) {
        res.diagnostics.rewhitened = true;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Cw);
        T = es.eigenvectors() *
            es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
            es.eigenvectors().transpose();
        X = T * X;
    }

    if (K == 1) {
        /* Nothing to rotate; the canonical 1x1 orthogonal transform is +1. */
        res.G = Eigen::MatrixXd::Ones(1, 1);
        res.diagnostics.converged = true;
        return res;
    }

    Eigen::MatrixXd W = initial_unmixing(K);

    /* Identifiability probe: the rotation signal is the tangential part of
     * the first raw update (the radial part is the contrast's drift and
     * carries no direction). For near-Gaussian rows the tangential part is
     * pure sampling noise of size O(1/sqrt(J)). */
    {
        const Eigen::MatrixXd raw = fixed_point_update(W, X, cfg.contrast);
        double maxTangential = 0.0;
        for (int r = 0; r < K; ++r) {
            const Eigen::VectorXd w = W.row(r).transpose();
            const Eigen::VectorXd u = raw.row(r).transpose();
            maxTangential = std::max(maxTangential, (u - w.dot(u) * w).norm());
        }
        const double floor = std::max(cfg.tol, 2.0 / std::sqrt(static_cast<double>(J)));
        if (maxTangential < floor) {
            /* No rotation is supported by the data; the identity changes
             * nothing and is the only defensible answer. */
            res.diagnostics.nonIdentifiable = true;
            res.diagnostics.converged = true;
            res.G = Eigen::MatrixXd::Identity(K, K);
            return res;
        }
    }

    for (int it = 1; it <= cfg.maxIters; ++it) {
        res.diagnostics.iterations = it;
        const Eigen::MatrixXd Wnew = symmetric_orth(fixed_point_update(W, X, cfg.contrast));
        const double delta =
            1.0 - (Wnew * W.transpose()).diagonal().cwiseAbs().minCoeff();
        res.diagnostics.finalDelta = delta;
        W = Wnew;
        if (delta < cfg.tol) {
            res.diagnostics.converged = true;
            break;
        }
    }

    /* Fold the internal whitening into the result but keep only its
     * orthogonal part, so G is orthogonal by construction. */
    Eigen::MatrixXd Gfull = W * T;
    if (res.diagnostics.rewhitened) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(Gfull, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::MatrixXd Q = svd.matrixU() * svd.matrixV().transpose();
        const Eigen::MatrixXd P = svd.matrixV() * svd.singularValues().asDiagonal() *
                                  svd.matrixV().transpose();
        res.diagnostics.rewhitenNonOrthogonality =
            (P - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff();
        Gfull = Q;
    }
    res.G = canonicalize_rows(Gfull);
    return res;
}

DeformationModel apply_separation(const DeformationModel& model, const Eigen::MatrixXd& G) {
    if (G.rows() != model.K || G.cols() != model.K)
        throw std::invalid_argument("apply_separation: G must be K x K");
    const Eigen::MatrixXd GtG = G * G.transpose();
    if ((GtG - Eigen::MatrixXd::Identity(model.K, model.K)).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("apply_separation: G is not orthogonal");

    DeformationModel out = model;
    out.Bprime = G * model.Bprime;
    out.G = G * model.G;
    out.variant = Variant::Ica;
    return out;
}

}  // namespace r1nrsfm
