#include "r1nrsfm/recovery.hpp"

#include <cmath>
#include <stdexcept>

namespace r1nrsfm {

RayleighSumProblem direction_problem(const Eigen::MatrixXd& deltaW,
                                     const RigidFactor& rigid,
                                     const Eigen::VectorXd& bk) {
    if (deltaW.rows() != rigid.M0.rows() || deltaW.rows() % 2 != 0)
        throw std::invalid_argument("direction_problem: residual/camera row mismatch");
    if (bk.size() != deltaW.cols())
        throw std::invalid_argument("direction_problem: row length mismatch");

    const int I = static_cast<int>(deltaW.rows() / 2);
    const double b2 = bk.squaredNorm();

    RayleighSumProblem p;
    p.g.reserve(I);
    p.H.reserve(I);
    for (int i = 0; i < I; ++i) {
        const Eigen::Matrix<double, 2, 3> Mi = rigid.M0.middleRows(2 * i, 2);
        p.g.push_back(Mi.transpose() * (deltaW.middleRows(2 * i, 2) * bk));
        p.H.push_back(b2 * (Mi.transpose() * Mi));
    }
    return p;
}

std::vector<DirectionSolution> solve_directions(const Eigen::MatrixXd& deltaW,
                                                const RigidFactor& rigid,
                                                const Eigen::MatrixXd& B,
                                                const SolverConfig& cfg) {
    if (B.cols() != deltaW.cols())
        throw std::invalid_argument("solve_directions: residual/rows length mismatch");

    std::vector<DirectionSolution> out;
    out.reserve(B.rows());
    for (int k = 0; k < B.rows(); ++k) {
        DirectionSolution sol;
        if (B.row(k).norm() == 0.0) {
            /* Zeroed mode: no signal, any direction is as good as another. */
            sol.degenerate = true;
            sol.converged = true;
            out.push_back(sol);
            continue;
        }
        const RayleighSumProblem p = direction_problem(deltaW, rigid, B.row(k).transpose());
        const RayleighMaximizeResult r = maximize_rayleigh_sum(p, cfg);
        sol.d = r.d;
        sol.objective = r.objective;
        sol.iterations = r.iterations;
        sol.converged = r.converged;
        sol.degenerate = r.degenerate;
        sol.restartSpread = r.restartSpread;
        out.push_back(sol);
    }
    return out;
}

BasisShapeSet form_basis_shapes(const RigidFactor& rigid, const Eigen::MatrixXd& B,
                                const Matrix3Xd& directions) {
    if (directions.cols() != B.rows())
        throw std::invalid_argument("form_basis_shapes: one direction per row required");
    if (rigid.M0.cols() != 3 || rigid.M0.rows() % 2 != 0)
        throw std::invalid_argument("form_basis_shapes: malformed cameras");
    for (int k = 0; k < directions.cols(); ++k) {
        const double n = directions.col(k).norm();
        if (std::abs(n - 1.0) > 1e-6)
            throw std::invalid_argument("form_basis_shapes: directions must be unit length");
    }

    const int I = static_cast<int>(rigid.M0.rows() / 2);
    const int K = static_cast<int>(B.rows());

    BasisShapeSet set;
    set.frames = I;
    set.modes = K;
    set.items.resize(static_cast<std::size_t>(I) * K);
    for (int i = 0; i < I; ++i) {
        const Eigen::Matrix<double, 2, 3> Mi = rigid.M0.middleRows(2 * i, 2);
        const double MiNorm = Mi.norm();
        for (int k = 0; k < K; ++k) {
            RankOneBasisShape& s = set.at(i, k);
            s.frame = i;
            s.mode = k;
            const Eigen::Vector2d md = Mi * directions.col(k);
            s.op = md * B.row(k);
            const double bNorm = B.row(k).norm();
            s.frobNorm = md.norm() * bNorm;
            s.zero = s.frobNorm <= 1e-15 * MiNorm * bNorm || s.frobNorm == 0.0;
        }
    }
    return set;
}

CoefficientMatrix project_coefficients(const Eigen::MatrixXd& deltaW,
                                       const BasisShapeSet& shapes) {
    if (deltaW.rows() != 2 * shapes.frames || shapes.frames == 0)
        throw std::invalid_argument("project_coefficients: frame count mismatch");
    if (!shapes.items.empty() && deltaW.cols() != shapes.items.front().op.cols())
        throw std::invalid_argument("project_coefficients: point count mismatch");

    CoefficientMatrix cm;
    cm.alpha.resize(shapes.frames, shapes.modes);
    for (int i = 0; i < shapes.frames; ++i) {
        const auto Wi = deltaW.middleRows(2 * i, 2);
        for (int k = 0; k < shapes.modes; ++k) {
            const RankOneBasisShape& s = shapes.at(i, k);
            cm.alpha(i, k) = s.zero ? 0.0 : Wi.cwiseProduct(s.op).sum() / s.frobNorm;
        }
    }
    return cm;
}

Eigen::MatrixXd reconstruct_residual(const BasisShapeSet& shapes,
                                     const Eigen::MatrixXd& alpha) {
    if (alpha.rows() != shapes.frames || alpha.cols() != shapes.modes)
        throw std::invalid_argument("reconstruct_residual: coefficient shape mismatch");
    if (shapes.items.empty())
        throw std::invalid_argument("reconstruct_residual: empty shape set");

    const int J = static_cast<int>(shapes.items.front().op.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * shapes.frames, J);
    for (int i = 0; i < shapes.frames; ++i) {
        for (int k = 0; k < shapes.modes; ++k) {
            const RankOneBasisShape& s = shapes.at(i, k);
            if (s.zero) continue;
            out.middleRows(2 * i, 2) += (alpha(i, k) / s.frobNorm) * s.op;
        }
    }
    return out;
}

}  // namespace r1nrsfm
