#pragma once

#include "r1nrsfm/types.hpp"

#include <Eigen/Core>

namespace r1nrsfm {

enum class IcaContrast { LogCosh, Cubic };

std::string to_string(IcaContrast c);
IcaContrast ica_contrast_from_string(const std::string& s);

struct IcaConfig {
    IcaContrast contrast = IcaContrast::LogCosh;
    double tol = 1e-8;   ///< rotation-delta convergence threshold
    int maxIters = 1000;
    bool centerRows = true;  ///< subtract each row's mean before iterating
};

struct IcaDiagnostics {
    int iterations = 0;
    bool converged = false;
    double finalDelta = 0.0;        ///< last rotation delta (see below)
    bool nonIdentifiable = false;   ///< inputs too Gaussian to separate
    double whitenessDeviation = 0.0;  ///< max |(1/J) Bc Bc^T - I| entry
    bool rewhitened = false;        ///< internal re-whitening was applied
    double rewhitenNonOrthogonality = 0.0;  ///< ||P - I||_max of the polar factor
};

/** Result of fastica_orthogonal: G is (K x K) orthogonal and G * Bprime are
 * the separated rows. */
struct IcaResult {
    Eigen::MatrixXd G;
    IcaDiagnostics diagnostics;
};

/** Symmetric fixed-point FastICA restricted to an orthogonal unmixing
 * matrix, for row-whitened inputs.
 *
 * Bprime is (K x J) with K <= J and linearly independent rows; each row is
 * treated as J samples of one signal. Rows are mean-centered first (unless
 * disabled). The rows are expected white, i.e. (1/J) Bc Bc^T = I; when the
 * deviation exceeds 1e-3 the input is re-whitened internally and only the
 * orthogonal polar factor of the combined transform is kept, so the
 * returned G is orthogonal regardless (the discarded non-orthogonal part is
 * reported in the diagnostics).
 *
 * Iteration: the standard symmetric fixed-point update with the LogCosh
 * (g = tanh) or Cubic (g = u^3) contrast, followed by symmetric
 * orthogonalization W <- (W W^T)^{-1/2} W. The start is the identity with a
 * tiny fixed asymmetric perturbation (entry (p, q) += 0.01 * sin(p + 2q)),
 * orthogonalized; the perturbation breaks the fixed point a plain identity
 * start sits on while keeping the run deterministic. Convergence is
 * declared when 1 - min diag |W_t W_{t-1}^T| < cfg.tol.
 *
 * Near-Gaussian rows make the separating rotation unidentifiable; this is
 * detected at the start (the tangential part of the first raw fixed-point
 * update, which is the rotation signal, stays below max(cfg.tol,
 * 2/sqrt(J)), the size of pure sampling noise) and the routine returns the
 * identity with nonIdentifiable set instead of wandering.
 *
 * Row signs and order of G are fixed deterministically: each row's
 * largest-magnitude entry is made positive (ties by lowest column index)
 * and rows are sorted by the column index of that entry so the separated
 * sources come out in a reproducible order.
 *
 * Throws std::invalid_argument on empty input, K > J, or non-finite
 * entries, and std::domain_error when rows are linearly dependent (some
 * row is numerically zero after centering). */
IcaResult fastica_orthogonal(const Eigen::MatrixXd& Bprime, const IcaConfig& cfg = {});

/** Applies a separating transform to a Pca-variant model: Bprime <- G *
 * Bprime, G is recorded, and the variant flips to Ica. Throws
 * std::invalid_argument if G is not K x K or not orthogonal within 1e-8. */
DeformationModel apply_separation(const DeformationModel& model, const Eigen::MatrixXd& G);

}  // namespace r1nrsfm
