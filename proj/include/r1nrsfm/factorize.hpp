#pragma once

#include "r1nrsfm/types.hpp"

#include <Eigen/Core>

namespace r1nrsfm {

/** Centers each frame of the tracks on its centroid and stacks the result
 * into the (2I x J) measurement matrix, remembering the removed centroids.
 * The operation is lossless: adding translations back reproduces the input
 * coordinates. */
MeasurementMatrix assemble_measurements(const TrackTable& tracks);

/** Rank-3 factorization W ~ M0 * B0 with the balanced scaling documented on
 * RigidFactor. Requires at least 2 frames and 4 points so that the rank-3
 * split is meaningful; otherwise throws std::invalid_argument. */
RigidFactor rigid_factor(const MeasurementMatrix& m);

/** The nonrigid residual dW = W - M0 * B0. Throws std::invalid_argument on
 * dimension mismatch. */
Eigen::MatrixXd nonrigid_residual(const MeasurementMatrix& m, const RigidFactor& rigid);

/** Rank-K split of the residual, dW ~ Mprime * Bprime, with the same
 * balanced scaling as the rigid step: Mprime = (1/sqrt(J)) U' S' and
 * Bprime = sqrt(J) V'^T. Rows whose singular value is numerically zero
 * (<= 1e-15 times the leading one) are zeroed together with the matching
 * Mprime column, so a vanishing residual yields an all-zero model instead
 * of arbitrary orthonormal fill. Requires 1 <= K <= min(2I, J); throws
 * std::invalid_argument otherwise. The returned model has G = I and the
 * Pca variant. */
DeformationModel nonrigid_factor(const Eigen::MatrixXd& deltaW, int K);

/** Advisory choice of K from the residual spectrum (descending singular
 * values): the smallest K whose discarded tail holds less than 1% of the
 * total squared energy. Returns 0 for an all-zero spectrum. Never applied
 * automatically; callers pick K themselves. */
int suggest_k(const Eigen::VectorXd& spectrum);

}  // namespace r1nrsfm
