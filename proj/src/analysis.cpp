#include "r1nrsfm/analysis.hpp"

#include "r1nrsfm/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

namespace r1nrsfm {

double inverse_snr(const MeasurementMatrix& m, const RigidFactor& rigid,
                   const BasisShapeSet& shapes, const Eigen::MatrixXd& alpha) {
    const double wNorm = m.W.norm();
    if (wNorm == 0.0)
        throw std::domain_error("inverse_snr: zero measurement matrix");
    Eigen::MatrixXd what = rigid.M0 * rigid.B0;
    what += reconstruct_residual(shapes, alpha);
    if (what.rows() != m.W.rows() || what.cols() != m.W.cols())
        throw std::invalid_argument("inverse_snr: dimension mismatch");
    return 100.0 * (m.W - what).norm() / wNorm;
}

Eigen::MatrixXd coefficient_covariance(const Eigen::MatrixXd& alpha) {
    const int I = static_cast<int>(alpha.rows());
    if (I < 2)
        throw std::invalid_argument("coefficient_covariance: need at least 2 frames");
    const Eigen::MatrixXd centered = alpha.rowwise() - alpha.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(I - 1);
}

double seriation_objective(const Eigen::MatrixXd& C, const std::vector<int>& perm) {
    const int K = static_cast<int>(C.rows());
    if (static_cast<int>(perm.size()) != K)
        throw std::invalid_argument("seriation_objective: permutation size mismatch");
    std::vector<bool> seen(K, false);
    for (int p : perm) {
        if (p < 0 || p >= K || seen[p])
            throw std::invalid_argument("seriation_objective: not a permutation");
        seen[p] = true;
    }
    double cost = 0.0;
    for (int p = 0; p < K; ++p)
        for (int q = p + 1; q < K; ++q)
            cost += std::abs(C(perm[p], perm[q])) * static_cast<double>(q - p);
    return cost;
}

namespace {

void check_symmetric(const Eigen::MatrixXd& C) {
    if (C.rows() != C.cols() || C.size() == 0)
        throw std::invalid_argument("covariance must be square and non-empty");
    const double scale = C.cwiseAbs().maxCoeff();
    if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale + 1e-300)
        throw std::invalid_argument("covariance must be symmetric");
}

}  // namespace

std::vector<int> seriate_covariance(const Eigen::MatrixXd& C) {
    check_symmetric(C);
    const int K = static_cast<int>(C.rows());

    std::vector<int> identity(K);
    for (int i = 0; i < K; ++i) identity[i] = i;
    if (K <= 2) return identity;

    /* Seed with the strongest off-diagonal pair (lowest indices on ties). */
    int sa = 0, sb = 1;
    double best = -1.0;
    for (int p = 0; p < K; ++p) {
        for (int q = p + 1; q < K; ++q) {
            const double v = std::abs(C(p, q));
            if (v > best) {
                best = v;
                sa = p;
                sb = q;
            }
        }
    }

    std::deque<int> chain{sa, sb};
    std::vector<bool> used(K, false);
    used[sa] = used[sb] = true;

    for (int placed = 2; placed < K; ++placed) {
        int bestComp = -1;
        bool toBack = true;
        double bestVal = -1.0;
        for (int u = 0; u < K; ++u) {
            if (used[u]) continue;
            const double backVal = std::abs(C(u, chain.back()));
            const double frontVal = std::abs(C(u, chain.front()));
            if (backVal > bestVal) {
                bestVal = backVal;
                bestComp = u;
                toBack = true;
            }
            if (frontVal > bestVal) {
                bestVal = frontVal;
                bestComp = u;
                toBack = false;
            }
        }
        if (toBack)
            chain.push_back(bestComp);
        else
            chain.push_front(bestComp);
        used[bestComp] = true;
    }

    std::vector<int> greedy(chain.begin(), chain.end());
    if (seriation_objective(C, greedy) > seriation_objective(C, identity))
        return identity;
    return greedy;
}

double covariance_concentration(const Eigen::MatrixXd& C) {
    check_symmetric(C);
    const int K = static_cast<int>(C.rows());
    if (K == 1) return 0.0;
    const double diagMax = C.diagonal().maxCoeff();
    if (diagMax <= 0.0) return 0.0;
    double offMax = 0.0;
    for (int p = 0; p < K; ++p)
        for (int q = 0; q < K; ++q)
            if (p != q) offMax = std::max(offMax, std::abs(C(p, q)));
    return offMax / diagMax;
}

}  // namespace r1nrsfm
