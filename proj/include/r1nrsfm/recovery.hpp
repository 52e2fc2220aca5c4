#pragma once

#include "r1nrsfm/numeric.hpp"
#include "r1nrsfm/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace r1nrsfm {

/** Back-projection direction recovered for one deformation mode. */
struct DirectionSolution {
    Eigen::Vector3d d = Eigen::Vector3d::UnitX();
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;   ///< mode carries no signal; d is arbitrary
    double restartSpread = 0.0;
};

/** Builds, for deformation row b_k, the per-frame data of the direction
 * problem: g[i] = M0^{i T} dW^i b_k and H[i] = ||b_k||^2 M0^{i T} M0^i.
 * Maximizing the Rayleigh sum over d then minimizes the reprojection
 * residual of mode k. */
RayleighSumProblem direction_problem(const Eigen::MatrixXd& deltaW,
                                     const RigidFactor& rigid,
                                     const Eigen::VectorXd& bk);

/** Recovers one unit direction d_k per row of B (K x J) by maximizing the
 * per-mode Rayleigh sum. Rows that are numerically zero yield a degenerate
 * solution with objective 0. Throws std::invalid_argument on dimension
 * mismatches between deltaW, rigid, and B. */
std::vector<DirectionSolution> solve_directions(const Eigen::MatrixXd& deltaW,
                                                const RigidFactor& rigid,
                                                const Eigen::MatrixXd& B,
                                                const SolverConfig& cfg = {});

/** Forms the I x K grid of rank-1 operators M0^i d_k b_k^T. directions is
 * (3 x K), one unit column per mode. Operators with Frobenius norm below
 * 1e-15 * ||M0^i||_F * ||b_k|| are flagged zero. */
BasisShapeSet form_basis_shapes(const RigidFactor& rigid, const Eigen::MatrixXd& B,
                                const Matrix3Xd& directions);

/** Per-frame, per-mode coefficients: alpha(i, k) is the inner product of
 * the frame's residual dW^i with the unit-normalized operator of shape
 * (i, k), i.e. the length of the residual's projection onto that operator.
 * Zero-flagged shapes get coefficient 0. Returns an I x K CoefficientMatrix
 * with the analysis attachments left empty. */
CoefficientMatrix project_coefficients(const Eigen::MatrixXd& deltaW,
                                       const BasisShapeSet& shapes);

/** The model's reconstruction of the nonrigid residual:
 * dWhat^i = sum_k alpha(i, k) * unit(B_k^i). */
Eigen::MatrixXd reconstruct_residual(const BasisShapeSet& shapes,
                                     const Eigen::MatrixXd& alpha);

}  // namespace r1nrsfm
