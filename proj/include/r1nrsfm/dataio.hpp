#pragma once

#include "r1nrsfm/ica.hpp"
#include "r1nrsfm/recovery.hpp"
#include "r1nrsfm/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace r1nrsfm {

/** Csv: one observation per line, header "frame,point,x,y", 0-based dense
 * indices in any order, each (frame, point) pair exactly once.
 * Matrix: whitespace-separated 2I x J numbers (frame-major row pairs) plus
 * a JSON sidecar at <path>.json with {"frames": I, "points": J} and
 * optional {"labels": [...]}. */
enum class TrackFormat { Csv, Matrix };

/** Infers the format from the file name: ".csv" means Csv, anything else
 * Matrix. */
TrackFormat track_format_from_path(const std::string& path);

/** Loads tracks in the given format. Throws std::runtime_error on IO
 * failure, malformed content, duplicate or missing (frame, point) pairs,
 * or non-finite values; the message names the first offending location. */
TrackTable load_tracks(const std::string& path, TrackFormat format);

/** Writes tracks in the given format (Csv rows in frame-major order;
 * Matrix with its sidecar). Deterministic: equal tables produce
 * byte-identical files. Throws std::runtime_error on IO failure. */
void save_tracks(const TrackTable& tracks, const std::string& path, TrackFormat format);

/** Parameters of the synthetic deforming-scene generator. */
struct SyntheticSpec {
    int frames = 40;
    int points = 30;
    int modes = 4;
    double noiseStd = 0.0;    ///< isotropic Gaussian pixel noise, applied last
    std::uint64_t seed = 0;
    /** Per-mode coefficient RMS; empty means 2.0 for every mode, a single
     * value is broadcast, otherwise the size must equal modes. */
    std::vector<double> coefficientStd;
    double cameraScaleMin = 40.0;  ///< uniform per-frame projection scale
    double cameraScaleMax = 60.0;
};

/** Everything the generator drew, before noise: per-frame scaled cameras M
 * (2I x 3) and image translations t (I x 2), mean shape B0 (3 x J),
 * unit directions (3 x K), unit deformation rows (K x J), and coefficients
 * alpha (I x K). The noiseless tracks are exactly
 * M^i (B0 + sum_k alpha(i,k) d_k b_k^T) + t_i. */
struct SyntheticGroundTruth {
    Eigen::MatrixXd M;
    MatrixX2d t;
    Eigen::MatrixXd B0;
    Matrix3Xd directions;
    Eigen::MatrixXd modeRows;
    Eigen::MatrixXd alpha;
};

/** Draws a random deforming scene whose noiseless tracks are exactly
 * recoverable by the factorization pipeline. The generator enforces the
 * model's identifiability conditions by construction:
 *
 *  - mean shape rows and deformation rows are zero-mean over points, and
 *    the deformation rows are orthonormal and orthogonal to the mean shape
 *    rows (so the rigid and nonrigid parts cannot leak into each other);
 *  - each mode's coefficient column is made orthogonal, frame-weighted by
 *    the cameras, to the rigid motion columns and the previous modes (so
 *    the low-rank split separates the modes exactly);
 *  - cameras are scaled rotations, with scales well above the coefficient
 *    RMS so the rigid part dominates the spectrum.
 *
 * Feasibility requires modes <= points - 4 and frames >= modes + 3;
 * violations and non-positive sizes throw std::invalid_argument. Gaussian
 * noise (noiseStd > 0) is drawn after the structure, so two specs differing
 * only in noiseStd share their ground truth. All draws come from a
 * deterministic generator seeded by spec.seed. */
std::pair<TrackTable, SyntheticGroundTruth> synthesize(const SyntheticSpec& spec);

/** Writes the result files of a factorization run into dir (created if
 * needed):
 *
 *  - cameras.json     per-frame 2x3 camera and translation
 *  - mean_shape.csv   B0, one 3 x J row triple
 *  - modes.json       variant, per-mode direction, deformation row,
 *                     objective value and solver flags
 *  - coefficients.csv I x K alpha matrix, header "frame,a1,...,aK"
 *  - covariance.csv   K x K covariance plus a trailing "permutation,..."
 *                     line with the seriation order
 *  - report.json      inverse SNR, per-frame residuals, residual spectrum,
 *                     and the configuration echo
 *  - mode_<k>_perturbation.csv  per mode: the mean shape displaced by
 *                     +/- 2 RMS(alpha_k) along mode k, 6 x J values
 *                     (3 rows plus, 3 rows minus)
 *
 * Numbers are written with up to 17 significant digits in a
 * locale-independent format, so equal inputs produce byte-identical files.
 * Wall-clock timings are deliberately not exported here. Returns the list
 * of files written. Throws std::runtime_error on IO failure and
 * std::invalid_argument on inconsistent dimensions. */
std::vector<std::string> export_results(const RigidFactor& rigid,
                                        const MatrixX2d& translations,
                                        const DeformationModel& model,
                                        const std::vector<DirectionSolution>& directions,
                                        const CoefficientMatrix& coefficients,
                                        const ReconstructionReport& report,
                                        const SolverConfig& solverCfg,
                                        const IcaConfig& icaCfg,
                                        const std::string& dir);

/** The parts of an export needed to re-evaluate or inspect a run. */
struct ExportedResults {
    Eigen::MatrixXd M0;
    MatrixX2d translations;
    Eigen::MatrixXd B0;
    Variant variant = Variant::Pca;
    Matrix3Xd directions;
    Eigen::MatrixXd modeRows;
    std::vector<double> objectives;
    std::vector<bool> degenerate;
    Eigen::MatrixXd alpha;
    Eigen::MatrixXd covariance;
    std::vector<int> permutation;
    double inverseSnrPercent = 0.0;

    int frames() const { return static_cast<int>(M0.rows() / 2); }
    int modes() const { return static_cast<int>(directions.cols()); }
};

/** Reads back cameras.json, mean_shape.csv, modes.json, coefficients.csv,
 * covariance.csv and report.json from dir. Throws std::runtime_error on IO
 * or parse failure. Loading an export and exporting it again is lossless
 * for every matrix. */
ExportedResults load_results(const std::string& dir);

/** Shortest round-trippable decimal form of v (up to 17 significant
 * digits, locale-independent). */
std::string format_double(double v);

/** Strict locale-independent parse; the whole string must be consumed.
 * Throws std::runtime_error otherwise. */
double parse_double(const std::string& s);

}  // namespace r1nrsfm
