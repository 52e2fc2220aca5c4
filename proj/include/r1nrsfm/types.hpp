#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace r1nrsfm {

using Matrix2Xd = Eigen::Matrix<double, 2, Eigen::Dynamic>;
using Matrix3Xd = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using MatrixX2d = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Matrix23d = Eigen::Matrix<double, 2, 3>;

/** Which linear transform is applied to the deformation rows after the
 * low-rank split: none (principal directions as-is) or an orthogonal
 * separating rotation estimated by FastICA. */
enum class Variant { Pca, Ica };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/** Dense 2D point tracks: J image points observed in each of I frames.
 *
 * Coordinates are stored as a (2I x J) matrix in frame-major row order:
 * rows 2i and 2i+1 hold the x and y coordinates of frame i. Every entry
 * must be finite; missing observations are not representable.
 */
class TrackTable {
public:
    /** coords is (2I x J) with the row layout described above. labels, if
     * given, names the J points and must have exactly J entries. Throws
     * std::invalid_argument on an odd row count, an empty matrix, a
     * non-finite entry, or a label count mismatch. */
    explicit TrackTable(Eigen::MatrixXd coords, std::vector<std::string> labels = {});

    int frames() const { return static_cast<int>(coords_.rows() / 2); }
    int points() const { return static_cast<int>(coords_.cols()); }

    const Eigen::MatrixXd& coords() const { return coords_; }
    const std::vector<std::string>& labels() const { return labels_; }

    double x(int frame, int point) const { return coords_(2 * frame, point); }
    double y(int frame, int point) const { return coords_(2 * frame + 1, point); }

    /** The (2 x J) coordinate block of one frame. */
    Eigen::Block<const Eigen::MatrixXd> frame(int i) const {
        return coords_.middleRows(2 * i, 2);
    }

private:
    Eigen::MatrixXd coords_;
    std::vector<std::string> labels_;
};

/** Centered measurement matrix ready for factorization.
 *
 * W is (2I x J): the tracked coordinates with the per-frame centroid
 * removed, so every row of W sums to zero. translations(i, :) stores the
 * removed centroid (x, y) of frame i, which makes the assembly lossless.
 */
struct MeasurementMatrix {
    Eigen::MatrixXd W;
    MatrixX2d translations;
    int frames = 0;
    int points = 0;

    /** The (2 x J) block of frame i. */
    Eigen::Block<const Eigen::MatrixXd> frame(int i) const {
        return W.middleRows(2 * i, 2);
    }
};

/** Rank-3 rigid decomposition W ~ M0 * B0.
 *
 * M0 is (2I x 3) and stacks per-frame affine cameras; B0 is (3 x J), the
 * mean shape. The balanced scaling puts the singular values' square roots
 * times sqrt(J) into B0, i.e. M0 = (1/sqrt(J)) U0 S0 and B0 = sqrt(J) V0^T.
 * sigma0 holds the three leading singular values of W and sigmaRest the
 * remaining ones in descending order. nearPlanar flags sigma0(2) falling
 * below 1e-8 * sigma0(0), where the third camera column is unreliable.
 */
struct RigidFactor {
    Eigen::MatrixXd M0;
    Eigen::MatrixXd B0;
    Eigen::Vector3d sigma0 = Eigen::Vector3d::Zero();
    Eigen::VectorXd sigmaRest;
    bool nearPlanar = false;

    /** The (2 x 3) affine camera of frame i. */
    Matrix23d camera(int i) const { return M0.middleRows(2 * i, 2); }
};

/** Rank-K split of the nonrigid residual dW ~ Mprime * B.
 *
 * Bprime (K x J) holds the deformation rows actually in use: the principal
 * rows for the Pca variant, or G times them for the Ica variant. Mprime
 * (2I x K) is the matching left factor of the principal split (it is not
 * rotated by G). G (K x K) is orthogonal and records the applied transform;
 * it is the identity for Pca. Rows belonging to numerically zero singular
 * values are zeroed rather than left as arbitrary orthonormal fill.
 */
struct DeformationModel {
    int K = 0;
    Eigen::MatrixXd Bprime;
    Eigen::MatrixXd Mprime;
    Eigen::MatrixXd G;
    Variant variant = Variant::Pca;
};

/** One rank-1 basis shape: the (2 x J) operator M0^i d_k b_k^T tied to
 * frame i and deformation mode k. zero marks operators with Frobenius norm
 * too small to normalize (their direction is undefined). */
struct RankOneBasisShape {
    int frame = 0;
    int mode = 0;
    Matrix2Xd op;
    double frobNorm = 0.0;
    bool zero = false;

    /** The operator scaled to unit Frobenius norm. Throws std::domain_error
     * when the operator is flagged zero. */
    Matrix2Xd unit() const {
        if (zero) throw std::domain_error("rank-1 basis shape is zero; no unit form");
        return op / frobNorm;
    }
};

/** All I*K rank-1 basis shapes of a model, indexed by (frame, mode). */
struct BasisShapeSet {
    int frames = 0;
    int modes = 0;
    std::vector<RankOneBasisShape> items;

    const RankOneBasisShape& at(int frame, int mode) const {
        return items[static_cast<std::size_t>(frame) * modes + mode];
    }
    RankOneBasisShape& at(int frame, int mode) {
        return items[static_cast<std::size_t>(frame) * modes + mode];
    }
};

/** Per-frame deformation coefficients alpha (I x K), plus the analysis
 * attachments filled in later: the K x K coefficient covariance (empty
 * until computed) and the seriation order of its components (empty until
 * computed; permutation[p] is the component placed at position p). */
struct CoefficientMatrix {
    Eigen::MatrixXd alpha;
    Eigen::MatrixXd covariance;
    std::vector<int> permutation;
};

/** Reconstruction quality summary.
 *
 * inverseSnrPercent is 100 * ||W - What||_F / ||W||_F. perFrameResiduals
 * holds ||W^i - What^i||_F per frame. energySpectrum is the singular value
 * spectrum of the nonrigid residual dW in descending order. runtimeMs is
 * wall-clock pipeline time and is reported separately from exports so that
 * exported artifacts stay byte-reproducible.
 */
struct ReconstructionReport {
    double inverseSnrPercent = 0.0;
    Eigen::VectorXd perFrameResiduals;
    Eigen::VectorXd energySpectrum;
    double runtimeMs = 0.0;
};

}  // namespace r1nrsfm
