#pragma once

#include "r1nrsfm/analysis.hpp"
#include "r1nrsfm/factorize.hpp"
#include "r1nrsfm/ica.hpp"
#include "r1nrsfm/numeric.hpp"
#include "r1nrsfm/recovery.hpp"
#include "r1nrsfm/types.hpp"

#include <vector>

namespace r1nrsfm {

struct PipelineConfig {
    int K = 1;
    Variant variant = Variant::Pca;
    SolverConfig solver;
    IcaConfig ica;
};

/** Wall-clock milliseconds per stage; diagnostic only, never exported. */
struct StageTimings {
    double assembleMs = 0.0;
    double rigidMs = 0.0;
    double nonrigidMs = 0.0;
    double icaMs = 0.0;
    double directionsMs = 0.0;
    double coefficientsMs = 0.0;
    double analysisMs = 0.0;
    double totalMs = 0.0;
};

struct PipelineResult {
    MeasurementMatrix measurements;
    RigidFactor rigid;
    DeformationModel model;
    std::vector<DirectionSolution> directions;
    BasisShapeSet shapes;
    CoefficientMatrix coefficients;
    ReconstructionReport report;
    IcaDiagnostics ica;          ///< meaningful only for the Ica variant
    bool icaSkipped = false;     ///< Ica requested but some row was zero
    bool rigidScene = false;     ///< residual negligible next to ||W||
    int suggestedK = 0;          ///< advisory only, never applied
    StageTimings timings;
};

/** Runs the full factorization: assemble, rank-3 rigid split, rank-K
 * residual split, optional FastICA separation, per-mode direction
 * recovery, rank-1 operator formation, coefficient projection, covariance
 * and seriation, and the reconstruction report.
 *
 * rigidScene is set when ||dW||_F <= 1e-12 * ||W||_F; the deformation
 * model is still produced (it is all zeros). For the Ica variant, a
 * numerically zero Bprime row makes separation meaningless, so the
 * pipeline keeps G = I and sets icaSkipped instead of failing.
 *
 * Requires 1 <= cfg.K <= min(2I, J) - 3 so the rigid and deformation parts
 * fit side by side; throws std::invalid_argument otherwise. */
PipelineResult run_pipeline(const TrackTable& tracks, const PipelineConfig& cfg);

}  // namespace r1nrsfm
