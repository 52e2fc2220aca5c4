#include "r1nrsfm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace r1nrsfm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

PipelineResult run_pipeline(const TrackTable& tracks, const PipelineConfig& cfg) {
    const int maxK =
        static_cast<int>(std::min<Eigen::Index>(2 * tracks.frames(), tracks.points())) - 3;
    if (cfg.K < 1 || cfg.K > maxK)
        throw std::invalid_argument("run_pipeline: K must be in [1, min(2I, J) - 3]");

    PipelineResult r;
    const auto tTotal = Clock::now();

    auto t = Clock::now();
    r.measurements = assemble_measurements(tracks);
    r.timings.assembleMs = ms_since(t);

    t = Clock::now();
    r.rigid = rigid_factor(r.measurements);
    r.timings.rigidMs = ms_since(t);

    t = Clock::now();
    const Eigen::MatrixXd deltaW = nonrigid_residual(r.measurements, r.rigid);
    r.rigidScene = deltaW.norm() <= 1e-12 * r.measurements.W.norm();
    r.model = nonrigid_factor(deltaW, cfg.K);
    if (r.rigidScene) {
        /* Below this floor the residual is roundoff; modes fitted to it
         * would be meaningless, so the model is zeroed outright. */
        r.model.Mprime.setZero();
        r.model.Bprime.setZero();
    }
    r.timings.nonrigidMs = ms_since(t);

    /* The residual spectrum is the rigid split's tail plus the three
     * singular values the rank-3 factor removed exactly. */
    r.report.energySpectrum.resize(r.rigid.sigmaRest.size() + 3);
    r.report.energySpectrum.head(r.rigid.sigmaRest.size()) = r.rigid.sigmaRest;
    r.report.energySpectrum.tail(3).setZero();
    r.suggestedK = suggest_k(r.report.energySpectrum);

    if (cfg.variant == Variant::Ica) {
        t = Clock::now();
        bool anyZeroRow = false;
        for (int k = 0; k < r.model.K; ++k)
            if (r.model.Bprime.row(k).norm() == 0.0) anyZeroRow = true;
        if (anyZeroRow) {
            /* A zeroed deformation row cannot be separated; keep the
             * principal rows instead of failing the run. */
            r.icaSkipped = true;
            r.model.variant = Variant::Ica;
        } else {
            const IcaResult ica = fastica_orthogonal(r.model.Bprime, cfg.ica);
            r.ica = ica.diagnostics;
            r.model = apply_separation(r.model, ica.G);
        }
        r.timings.icaMs = ms_since(t);
    }

    t = Clock::now();
    r.directions = solve_directions(deltaW, r.rigid, r.model.Bprime, cfg.solver);
    Matrix3Xd dirs(3, r.model.K);
    for (int k = 0; k < r.model.K; ++k) dirs.col(k) = r.directions[k].d;
    r.timings.directionsMs = ms_since(t);

    t = Clock::now();
    r.shapes = form_basis_shapes(r.rigid, r.model.Bprime, dirs);
    r.coefficients = project_coefficients(deltaW, r.shapes);
    r.timings.coefficientsMs = ms_since(t);

    t = Clock::now();
    if (r.measurements.frames >= 2) {
        r.coefficients.covariance = coefficient_covariance(r.coefficients.alpha);
        r.coefficients.permutation = seriate_covariance(r.coefficients.covariance);
    }

    const double wNorm = r.measurements.W.norm();
    if (wNorm == 0.0)
        throw std::domain_error("run_pipeline: all frames collapse to their centroid");
    const Eigen::MatrixXd what =
        r.rigid.M0 * r.rigid.B0 + reconstruct_residual(r.shapes, r.coefficients.alpha);
    r.report.inverseSnrPercent = 100.0 * (r.measurements.W - what).norm() / wNorm;
    r.report.perFrameResiduals.resize(r.measurements.frames);
    for (int i = 0; i < r.measurements.frames; ++i)
        r.report.perFrameResiduals(i) =
            (r.measurements.W.middleRows(2 * i, 2) - what.middleRows(2 * i, 2)).norm();
    r.timings.analysisMs = ms_since(t);

    r.report.runtimeMs = ms_since(tTotal);
    r.timings.totalMs = r.report.runtimeMs;
    return r;
}

}  // namespace r1nrsfm
