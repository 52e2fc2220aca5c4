#pragma once

#include <Eigen/Core>

#include <vector>

namespace r1nrsfm {

/** Rank-r truncated singular value decomposition A ~ U diag(S) V^T.
 *
 * U is (m x r), S holds the r leading singular values in descending order,
 * V is (n x r). tailS holds the min(m,n) - r discarded singular values and
 * residualEnergy their squared sum, which equals ||A - U diag(S) V^T||_F^2.
 *
 * Signs are fixed deterministically: in each column of V the entry of
 * largest magnitude is made positive (ties broken by lowest row index) and
 * the matching column of U is flipped with it.
 */
struct TruncatedSvd {
    Eigen::MatrixXd U;
    Eigen::VectorXd S;
    Eigen::MatrixXd V;
    Eigen::VectorXd tailS;
    double residualEnergy = 0.0;
};

/** Computes the deterministic rank-r truncated SVD described above.
 * Throws std::invalid_argument if A is empty or has non-finite entries, or
 * if rank is outside [1, min(m, n)]. */
TruncatedSvd truncated_svd(const Eigen::MatrixXd& A, int rank);

/** Sum-of-Rayleigh-quotients problem over the unit sphere in R^3:
 *
 *   maximize f(d) = sum_i (d^T g[i])^2 / (d^T H[i] d)
 *
 * where every H[i] is symmetric positive semidefinite. Frames whose H has
 * trace below a relative floor are skipped by the evaluator (their quotient
 * is 0/0 and carries no information). */
struct RayleighSumProblem {
    std::vector<Eigen::Vector3d> g;
    std::vector<Eigen::Matrix3d> H;

    int frames() const { return static_cast<int>(g.size()); }

    /** Throws std::invalid_argument if g and H differ in length, are empty,
     * contain non-finite entries, or some H is not symmetric PSD within
     * 1e-9 relative. */
    void validate() const;
};

/** Evaluates f(d). d need not be normalized (f is scale-invariant); a zero
 * d throws std::invalid_argument. If skippedFrames is non-null it receives
 * the number of frames excluded by the trace floor. */
double rayleigh_sum_objective(const RayleighSumProblem& p, const Eigen::Vector3d& d,
                              int* skippedFrames = nullptr);

struct SolverConfig {
    double tol = 1e-10;  ///< stationarity residual threshold (scale-free)
    int maxIters = 200;  ///< per restart
    int numStarts = 8;   ///< deterministic restarts used, clamped to [1, 8]
};

/** Outcome of the maximizer. d is unit-norm with its largest-magnitude
 * entry positive. objective is f at d in the problem's original scale.
 * degenerate marks problems whose every g[i] is zero, where any d attains
 * the maximum 0 and d = e1 is returned. restartSpread is the difference
 * between the best and worst converged restart objectives (0 when fewer
 * than two restarts converge). restartTraces records the accepted objective
 * value per iteration for each restart; each trace is non-decreasing. */
struct RayleighMaximizeResult {
    Eigen::Vector3d d = Eigen::Vector3d::UnitX();
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;
    double restartSpread = 0.0;
    std::vector<std::vector<double>> restartTraces;
};

/** Maximizes f over the unit sphere by a damped self-consistent generalized
 * eigenvector iteration. The gradient of f is 2 (A(d) d - B(d) d) with
 *
 *   A(d) = sum_i g_i g_i^T / (d^T H_i d),
 *   B(d) = sum_i ((d^T g_i)^2 / (d^T H_i d)^2) H_i,
 *
 * and is tangential to the sphere automatically (d^T A d = d^T B d = f), so
 * d is stationary iff A(d) d = B(d) d, a generalized eigenpair of (A, B)
 * with eigenvalue exactly 1. Each step re-solves the eigenproblem frozen at
 * the current d and moves toward its top eigenvector, halving the step
 * while the objective would decrease. Convergence is declared when the
 * stationarity residual ||A(d) d - B(d) d|| / ||B(d) d|| falls below cfg.tol. The
 * iteration runs from a fixed list of starting points (coordinate axes,
 * pairwise bisectors, the all-ones direction, and the dominant eigenvector
 * of sum_i g_i g_i^T) and the best restart wins, which makes the result
 * deterministic. The problem is internally rescaled so the tolerance acts
 * on a dimension-free residual. */
RayleighMaximizeResult maximize_rayleigh_sum(const RayleighSumProblem& p,
                                             const SolverConfig& cfg = {});

}  // namespace r1nrsfm
