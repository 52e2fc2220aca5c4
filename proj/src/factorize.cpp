#include "r1nrsfm/factorize.hpp"

#include "r1nrsfm/numeric.hpp"

#include <cmath>
#include <stdexcept>

namespace r1nrsfm {

MeasurementMatrix assemble_measurements(const TrackTable& tracks) {
    const int I = tracks.frames();
    const int J = tracks.points();

    MeasurementMatrix m;
    m.frames = I;
    m.points = J;
    m.W = tracks.coords();
    m.translations.resize(I, 2);
    for (int i = 0; i < I; ++i) {
        m.translations(i, 0) = m.W.row(2 * i).mean();
        m.translations(i, 1) = m.W.row(2 * i + 1).mean();
        m.W.row(2 * i).array() -= m.translations(i, 0);
        m.W.row(2 * i + 1).array() -= m.translations(i, 1);
    }
    return m;
}

RigidFactor rigid_factor(const MeasurementMatrix& m) {
    if (m.frames < 2 || m.points < 4)
        throw std::invalid_argument(
            "rigid_factor: need at least 2 frames and 4 points for a rank-3 split");
    if (m.W.rows() != 2 * m.frames || m.W.cols() != m.points)
        throw std::invalid_argument("rigid_factor: inconsistent measurement matrix");

    const double sqrtJ = std::sqrt(static_cast<double>(m.points));
    const TruncatedSvd svd = truncated_svd(m.W, 3);

    RigidFactor rf;
    rf.M0 = svd.U * svd.S.asDiagonal() / sqrtJ;
    rf.B0 = sqrtJ * svd.V.transpose();
    rf.sigma0 = svd.S;
    rf.sigmaRest = svd.tailS;
    rf.nearPlanar = svd.S(2) < 1e-8 * svd.S(0);
    return rf;
}

Eigen::MatrixXd nonrigid_residual(const MeasurementMatrix& m, const RigidFactor& rigid) {
    if (rigid.M0.rows() != m.W.rows() || rigid.B0.cols() != m.W.cols() ||
        rigid.M0.cols() != 3 || rigid.B0.rows() != 3)
        throw std::invalid_argument("nonrigid_residual: dimension mismatch");
    return m.W - rigid.M0 * rigid.B0;
}

DeformationModel nonrigid_factor(const Eigen::MatrixXd& deltaW, int K) {
    const int minDim = static_cast<int>(std::min(deltaW.rows(), deltaW.cols()));
    if (K < 1 || K > minDim)
        throw std::invalid_argument("nonrigid_factor: K must be in [1, min(2I, J)]");

    const double sqrtJ = std::sqrt(static_cast<double>(deltaW.cols()));
    const TruncatedSvd svd = truncated_svd(deltaW, K);

    DeformationModel model;
    model.K = K;
    model.Mprime = svd.U * svd.S.asDiagonal() / sqrtJ;
    model.Bprime = sqrtJ * svd.V.transpose();
    model.G = Eigen::MatrixXd::Identity(K, K);
    model.variant = Variant::Pca;

    /* A numerically zero singular value means the row is arbitrary
     * orthonormal fill; zero it so downstream code can tell. */
    const double floor = 1e-15 * svd.S(0);
    for (int k = 0; k < K; ++k) {
        if (svd.S(k) <= floor) {
            model.Bprime.row(k).setZero();
            model.Mprime.col(k).setZero();
        }
    }
    return model;
}

int suggest_k(const Eigen::VectorXd& spectrum) {
    if (spectrum.size() == 0) return 0;
    const double total = spectrum.squaredNorm();
    if (total == 0.0) return 0;
    double tail = total;
    for (int k = 1; k <= spectrum.size(); ++k) {
        tail -= spectrum(k - 1) * spectrum(k - 1);
        if (tail < 0.01 * total) return k;
    }
    return static_cast<int>(spectrum.size());
}

}  // namespace r1nrsfm
