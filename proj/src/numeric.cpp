#include "r1nrsfm/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace r1nrsfm {

namespace {

/* Index of the largest-magnitude entry, lowest index on ties. */
int argmax_abs(const Eigen::VectorXd& v) {
    int best = 0;
    double bestAbs = std::abs(v(0));
    for (int i = 1; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > bestAbs) {
            bestAbs = a;
            best = i;
        }
    }
    return best;
}

/* Flips v so its largest-magnitude entry is positive. Returns the sign
 * applied (zero vectors are left alone, sign +1). */
double canonical_sign(const Eigen::VectorXd& v) {
    const double pivot = v(argmax_abs(v));
    return pivot < 0.0 ? -1.0 : 1.0;
}

}  // namespace

TruncatedSvd truncated_svd(const Eigen::MatrixXd& A, int rank) {
    if (A.size() == 0) throw std::invalid_argument("truncated_svd: empty matrix");
    if (!A.allFinite()) throw std::invalid_argument("truncated_svd: non-finite entries");
    const int minDim = static_cast<int>(std::min(A.rows(), A.cols()));
    if (rank < 1 || rank > minDim)
        throw std::invalid_argument("truncated_svd: rank must be in [1, min(rows, cols)]");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();

    TruncatedSvd out;
    out.U = svd.matrixU().leftCols(rank);
    out.S = sv.head(rank);
    out.V = svd.matrixV().leftCols(rank);
    out.tailS = sv.tail(minDim - rank);
    out.residualEnergy = out.tailS.squaredNorm();

    for (int k = 0; k < rank; ++k) {
        const double s = canonical_sign(out.V.col(k));
        out.V.col(k) *= s;
        out.U.col(k) *= s;
    }
    return out;
}

void RayleighSumProblem::validate() const {
    if (g.empty()) throw std::invalid_argument("rayleigh problem: no frames");
    if (g.size() != H.size())
        throw std::invalid_argument("rayleigh problem: g and H lengths differ");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g[i].allFinite() || !H[i].allFinite())
            throw std::invalid_argument("rayleigh problem: non-finite entries");
        const double scale = H[i].cwiseAbs().maxCoeff();
        if ((H[i] - H[i].transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale + 1e-300)
            throw std::invalid_argument("rayleigh problem: H not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H[i], Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) < -1e-9 * scale - 1e-300)
            throw std::invalid_argument("rayleigh problem: H not positive semidefinite");
    }
}

double rayleigh_sum_objective(const RayleighSumProblem& p, const Eigen::Vector3d& d,
                              int* skippedFrames) {
    if (p.g.empty() || p.g.size() != p.H.size())
        throw std::invalid_argument("rayleigh objective: malformed problem");
    if (!d.allFinite() || d.norm() == 0.0)
        throw std::invalid_argument("rayleigh objective: direction must be nonzero");

    double traceMax = 0.0;
    for (const auto& H : p.H) traceMax = std::max(traceMax, H.trace());

    const double dd = d.squaredNorm();
    double f = 0.0;
    int skipped = 0;
    for (std::size_t i = 0; i < p.g.size(); ++i) {
        const double tr = p.H[i].trace();
        if (tr <= 1e-14 * traceMax) {
            ++skipped;
            continue;
        }
        const double denom = d.dot(p.H[i] * d);
        if (denom <= 1e-14 * tr * dd) {
            ++skipped;
            continue;
        }
        const double num = d.dot(p.g[i]);
        f += num * num / denom;
    }
    if (skippedFrames) *skippedFrames = skipped;
    return f;
}

namespace {

struct ScaledProblem {
    std::vector<Eigen::Vector3d> g;
    std::vector<Eigen::Matrix3d> H;
    double traceMax = 0.0;
};

/* Stationarity data at d: the frozen pencil (A, B) whose top generalized
 * eigenvector is the next iterate, and the objective value. */
struct PencilAt {
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
    double f = 0.0;
};

PencilAt build_pencil(const ScaledProblem& sp, const Eigen::Vector3d& d) {
    PencilAt out;
    const double dd = d.squaredNorm();
    for (std::size_t i = 0; i < sp.g.size(); ++i) {
        const double tr = sp.H[i].trace();
        if (tr <= 1e-14 * sp.traceMax) continue;
        const double denom = d.dot(sp.H[i] * d);
        if (denom <= 1e-14 * tr * dd) continue;
        const double num = d.dot(sp.g[i]);
        out.A += sp.g[i] * sp.g[i].transpose() / denom;
        out.B += (num * num / (denom * denom)) * sp.H[i];
        out.f += num * num / denom;
    }
    return out;
}

double scaled_objective(const ScaledProblem& sp, const Eigen::Vector3d& d) {
    const double dd = d.squaredNorm();
    double f = 0.0;
    for (std::size_t i = 0; i < sp.g.size(); ++i) {
        const double tr = sp.H[i].trace();
        if (tr <= 1e-14 * sp.traceMax) continue;
        const double denom = d.dot(sp.H[i] * d);
        if (denom <= 1e-14 * tr * dd) continue;
        const double num = d.dot(sp.g[i]);
        f += num * num / denom;
    }
    return f;
}

struct RestartOutcome {
    Eigen::Vector3d d;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

RestartOutcome run_restart(const ScaledProblem& sp, Eigen::Vector3d d,
                           const SolverConfig& cfg) {
    RestartOutcome out;
    d.normalize();
    double fcur = scaled_objective(sp, d);
    out.trace.push_back(fcur);

    for (int it = 1; it <= cfg.maxIters; ++it) {
        out.iterations = it;
        const PencilAt pc = build_pencil(sp, d);

        /* Gradient of the objective is 2(A d - B d) and is tangential to
         * the sphere automatically (d^T A d = d^T B d = f), so stationarity
         * is A d = B d: a generalized eigenpair with eigenvalue exactly 1. */
        const double bd = (pc.B * d).norm();
        const double resid = (pc.A * d - pc.B * d).norm() / (bd + 1e-300);
        if (resid < cfg.tol) {
            out.converged = true;
            break;
        }
        if (pc.B.trace() <= 0.0) {
            /* d is orthogonal to every g: a flat stationary valley at 0.
             * Nothing local to improve; other restarts cover it. */
            out.converged = true;
            break;
        }

        const double ridge = 1e-14 * pc.B.trace() + 1e-300;
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> ges(
            pc.A, pc.B + ridge * Eigen::Matrix3d::Identity());
        Eigen::Vector3d x = ges.eigenvectors().col(2).normalized();
        if (x.dot(d) < 0.0) x = -x;

        bool accepted = false;
        for (double t = 1.0; t >= 1e-4; t *= 0.5) {
            Eigen::Vector3d cand = ((1.0 - t) * d + t * x);
            const double cn = cand.norm();
            if (cn < 1e-12) continue;
            cand /= cn;
            const double fc = scaled_objective(sp, cand);
            if (fc >= fcur - 1e-15 * std::max(1.0, std::abs(fcur))) {
                d = cand;
                fcur = fc;
                accepted = true;
                break;
            }
        }
        out.trace.push_back(fcur);
        if (!accepted) break;  /* stuck; report non-converged */
    }

    out.d = d;
    out.f = fcur;
    return out;
}

}  // namespace

RayleighMaximizeResult maximize_rayleigh_sum(const RayleighSumProblem& p,
                                             const SolverConfig& cfg) {
    p.validate();
    if (cfg.tol <= 0.0 || cfg.maxIters < 1)
        throw std::invalid_argument("maximize_rayleigh_sum: bad solver config");

    RayleighMaximizeResult res;

    double gNorm2 = 0.0;
    for (const auto& g : p.g) gNorm2 += g.squaredNorm();
    if (gNorm2 == 0.0) {
        res.d = Eigen::Vector3d::UnitX();
        res.objective = 0.0;
        res.converged = true;
        res.degenerate = true;
        res.restartTraces = {{0.0}};
        return res;
    }

    const double sg = std::sqrt(gNorm2 / static_cast<double>(p.g.size()));
    double trSum = 0.0;
    for (const auto& H : p.H) trSum += H.trace();
    const double sh = std::max(trSum / (3.0 * static_cast<double>(p.H.size())),
                               std::numeric_limits<double>::min());

    ScaledProblem sp;
    sp.g.reserve(p.g.size());
    sp.H.reserve(p.H.size());
    for (const auto& g : p.g) sp.g.push_back(g / sg);
    for (const auto& H : p.H) sp.H.push_back(H / sh);
    for (const auto& H : sp.H) sp.traceMax = std::max(sp.traceMax, H.trace());

    Eigen::Matrix3d gg = Eigen::Matrix3d::Zero();
    for (const auto& g : sp.g) gg += g * g.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gg);
    Eigen::Vector3d gDom = es.eigenvectors().col(2);
    gDom *= canonical_sign(gDom);

    const double r2 = 1.0 / std::sqrt(2.0);
    const double r3 = 1.0 / std::sqrt(3.0);
    const Eigen::Vector3d starts[8] = {
        Eigen::Vector3d::UnitX(),       Eigen::Vector3d::UnitY(),
        Eigen::Vector3d::UnitZ(),       Eigen::Vector3d(r2, r2, 0.0),
        Eigen::Vector3d(r2, 0.0, r2),   Eigen::Vector3d(0.0, r2, r2),
        Eigen::Vector3d(r3, r3, r3),    gDom,
    };
    const int numStarts = std::clamp(cfg.numStarts, 1, 8);

    std::vector<RestartOutcome> outcomes;
    outcomes.reserve(numStarts);
    for (int s = 0; s < numStarts; ++s)
        outcomes.push_back(run_restart(sp, starts[s], cfg));

    int best = 0;
    for (int s = 1; s < numStarts; ++s) {
        const bool better = outcomes[s].f > outcomes[best].f ||
                            (outcomes[s].f == outcomes[best].f &&
                             outcomes[s].converged && !outcomes[best].converged);
        if (better) best = s;
    }

    double fMin = std::numeric_limits<double>::infinity();
    double fMax = -std::numeric_limits<double>::infinity();
    int numConverged = 0;
    for (const auto& o : outcomes) {
        if (!o.converged) continue;
        ++numConverged;
        fMin = std::min(fMin, o.f);
        fMax = std::max(fMax, o.f);
    }

    res.d = outcomes[best].d * canonical_sign(outcomes[best].d);
    res.objective = rayleigh_sum_objective(p, res.d);
    res.iterations = outcomes[best].iterations;
    res.converged = outcomes[best].converged;
    res.degenerate = false;
    const double backScale = sg * sg / sh;  /* scaled objective -> original */
    res.restartSpread = numConverged >= 2 ? (fMax - fMin) * backScale : 0.0;
    res.restartTraces.reserve(outcomes.size());
    for (auto& o : outcomes) {
        for (double& v : o.trace) v *= backScale;
        res.restartTraces.push_back(std::move(o.trace));
    }
    return res;
}

}  // namespace r1nrsfm
