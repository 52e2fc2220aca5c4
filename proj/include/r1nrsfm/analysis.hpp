#pragma once

#include "r1nrsfm/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace r1nrsfm {

/** Relative reprojection error in percent: 100 * ||W - What||_F / ||W||_F,
 * where What = M0 B0 + sum_k alpha(:, k) applied through the unit rank-1
 * operators. Throws std::domain_error when ||W||_F is zero. */
double inverse_snr(const MeasurementMatrix& m, const RigidFactor& rigid,
                   const BasisShapeSet& shapes, const Eigen::MatrixXd& alpha);

/** Sample covariance of the coefficient columns (rows of alpha are the I
 * observations): C = (1/(I-1)) Ac^T Ac with Ac column-centered. Requires
 * I >= 2; throws std::invalid_argument otherwise. */
Eigen::MatrixXd coefficient_covariance(const Eigen::MatrixXd& alpha);

/** Cost of an ordering: sum over pairs p < q of |C(perm[p], perm[q])| *
 * (q - p). Lower is better; it pulls strongly covarying components next to
 * each other. */
double seriation_objective(const Eigen::MatrixXd& C, const std::vector<int>& perm);

/** Orders the components of a symmetric covariance so that strongly
 * covarying ones sit close together. Greedy chain growth: start from the
 * pair with the largest |C| off-diagonal, then repeatedly append to either
 * chain end the unused component with the largest |C| toward that end.
 * Ties pick the lowest component index, then the chain's back end. If the
 * greedy chain somehow scores worse than the identity ordering, the
 * identity is returned, so the result is never a regression. Throws
 * std::invalid_argument if C is not square and symmetric within 1e-9. */
std::vector<int> seriate_covariance(const Eigen::MatrixXd& C);

/** Largest off-diagonal |C| divided by largest diagonal entry; a cheap
 * summary of how far the coefficients are from uncorrelated. Returns 0 for
 * a 1 x 1 matrix. */
double covariance_concentration(const Eigen::MatrixXd& C);

}  // namespace r1nrsfm
