#include "r1nrsfm/dataio.hpp"

#include "r1nrsfm/analysis.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace fs = std::filesystem;
using nlohmann::json;

namespace r1nrsfm {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v{};
    const char* b = s.data();
    const char* e = b + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw std::runtime_error("bad number '" + s + "'");
    return v;
}

namespace {

long parse_long(const std::string& s) {
    long v{};
    const char* b = s.data();
    const char* e = b + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw std::runtime_error("bad integer '" + s + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::string locate(int frame, int point) {
    return "(frame " + std::to_string(frame) + ", point " + std::to_string(point) + ")";
}

TrackTable load_tracks_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error(path + ": empty file");
    if (lines[0] != "frame,point,x,y")
        throw std::runtime_error(path + ": expected header 'frame,point,x,y'");

    struct Obs {
        int frame, point;
        double x, y;
    };
    std::vector<Obs> obs;
    int maxFrame = -1, maxPoint = -1;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        const auto fields = split_csv_line(lines[n]);
        if (fields.size() != 4)
            throw std::runtime_error(path + ": line " + std::to_string(n + 1) +
                                     ": expected 4 fields, got " +
                                     std::to_string(fields.size()));
        try {
            Obs o;
            o.frame = static_cast<int>(parse_long(fields[0]));
            o.point = static_cast<int>(parse_long(fields[1]));
            o.x = parse_double(fields[2]);
            o.y = parse_double(fields[3]);
            if (o.frame < 0 || o.point < 0)
                throw std::runtime_error("negative index");
            obs.push_back(o);
            maxFrame = std::max(maxFrame, o.frame);
            maxPoint = std::max(maxPoint, o.point);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(path + ": line " + std::to_string(n + 1) + ": " +
                                     e.what());
        }
    }
    if (obs.empty()) throw std::runtime_error(path + ": no observations");

    const int I = maxFrame + 1;
    const int J = maxPoint + 1;
    Eigen::MatrixXd coords(2 * I, J);
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(I) * J, 0);
    for (const Obs& o : obs) {
        std::uint8_t& s = seen[static_cast<std::size_t>(o.frame) * J + o.point];
        if (s) throw std::runtime_error(path + ": duplicate observation " +
                                        locate(o.frame, o.point));
        s = 1;
        if (!std::isfinite(o.x) || !std::isfinite(o.y))
            throw std::runtime_error(path + ": non-finite value at " +
                                     locate(o.frame, o.point));
        coords(2 * o.frame, o.point) = o.x;
        coords(2 * o.frame + 1, o.point) = o.y;
    }
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
            if (!seen[static_cast<std::size_t>(i) * J + j])
                throw std::runtime_error(path + ": missing observation " + locate(i, j));

    return TrackTable(std::move(coords));
}

TrackTable load_tracks_matrix(const std::string& path) {
    const std::string sidecarPath = path + ".json";
    std::ifstream sc(sidecarPath);
    if (!sc) throw std::runtime_error(sidecarPath + ": cannot open for reading");
    json meta;
    try {
        meta = json::parse(sc);
    } catch (const json::exception& e) {
        throw std::runtime_error(sidecarPath + ": " + e.what());
    }
    if (!meta.contains("frames") || !meta.contains("points") ||
        !meta["frames"].is_number_integer() || !meta["points"].is_number_integer())
        throw std::runtime_error(sidecarPath + ": needs integer 'frames' and 'points'");
    const int I = meta["frames"].get<int>();
    const int J = meta["points"].get<int>();
    if (I < 1 || J < 1)
        throw std::runtime_error(sidecarPath + ": frames and points must be positive");

    std::vector<std::string> labels;
    if (meta.contains("labels")) {
        if (!meta["labels"].is_array())
            throw std::runtime_error(sidecarPath + ": 'labels' must be an array");
        for (const auto& l : meta["labels"]) labels.push_back(l.get<std::string>());
    }

    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(2 * I) * J);
    std::string token;
    while (in >> token) {
        try {
            values.push_back(parse_double(token));
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(path + ": " + e.what());
        }
    }
    const std::size_t expected = static_cast<std::size_t>(2 * I) * J;
    if (values.size() != expected)
        throw std::runtime_error(path + ": expected " + std::to_string(expected) +
                                 " values, found " + std::to_string(values.size()));

    Eigen::MatrixXd coords(2 * I, J);
    for (int r = 0; r < 2 * I; ++r)
        for (int j = 0; j < J; ++j) {
            const double v = values[static_cast<std::size_t>(r) * J + j];
            if (!std::isfinite(v))
                throw std::runtime_error(path + ": non-finite value at " +
                                         locate(r / 2, j));
            coords(r, j) = v;
        }
    try {
        return TrackTable(std::move(coords), std::move(labels));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace

TrackFormat track_format_from_path(const std::string& path) {
    return fs::path(path).extension() == ".csv" ? TrackFormat::Csv : TrackFormat::Matrix;
}

TrackTable load_tracks(const std::string& path, TrackFormat format) {
    return format == TrackFormat::Csv ? load_tracks_csv(path) : load_tracks_matrix(path);
}

void save_tracks(const TrackTable& tracks, const std::string& path, TrackFormat format) {
    std::ostringstream body;
    if (format == TrackFormat::Csv) {
        /* Point labels have no column in this format and are dropped. */
        body << "frame,point,x,y\n";
        for (int i = 0; i < tracks.frames(); ++i)
            for (int j = 0; j < tracks.points(); ++j)
                body << i << ',' << j << ',' << format_double(tracks.x(i, j)) << ','
                     << format_double(tracks.y(i, j)) << '\n';
        write_file(path, body.str());
        return;
    }
    for (int r = 0; r < 2 * tracks.frames(); ++r) {
        for (int j = 0; j < tracks.points(); ++j) {
            if (j) body << ' ';
            body << format_double(tracks.coords()(r, j));
        }
        body << '\n';
    }
    write_file(path, body.str());

    json meta;
    meta["frames"] = tracks.frames();
    meta["points"] = tracks.points();
    if (!tracks.labels().empty()) meta["labels"] = tracks.labels();
    write_file(path + ".json", meta.dump(2) + "\n");
}

namespace {

/* Deterministic draws across platforms: the standard distributions are
 * implementation-defined, so uniforms and normals are derived from the
 * raw engine output directly. */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        if (hasSpare_) {
            hasSpare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        hasSpare_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd gaussianVector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = gaussian();
        return v;
    }

private:
    std::mt19937_64 eng_;
    bool hasSpare_ = false;
    double spare_ = 0.0;
};

Eigen::Matrix3d random_rotation(Rng& rng) {
    Eigen::Vector4d q;
    for (int i = 0; i < 4; ++i) q(i) = rng.gaussian();
    q.normalize();
    const double w = q(0), x = q(1), y = q(2), z = q(3);
    Eigen::Matrix3d R;
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return R;
}

void validate_spec(const SyntheticSpec& spec, std::vector<double>& coefStd) {
    if (spec.frames < 1 || spec.points < 1 || spec.modes < 1)
        throw std::invalid_argument("synthesize: frames, points and modes must be positive");
    if (spec.points < spec.modes + 4)
        throw std::invalid_argument(
            "synthesize: need points >= modes + 4 so deformation rows can be made "
            "independent of the mean shape");
    if (spec.frames < spec.modes + 3)
        throw std::invalid_argument(
            "synthesize: need frames >= modes + 3 so mode coefficients can be made "
            "separable");
    if (spec.noiseStd < 0.0) throw std::invalid_argument("synthesize: negative noise");
    if (!(spec.cameraScaleMin > 0.0) || spec.cameraScaleMax < spec.cameraScaleMin)
        throw std::invalid_argument("synthesize: camera scale range must satisfy 0 < min <= max");

    if (spec.coefficientStd.empty())
        coefStd.assign(spec.modes, 2.0);
    else if (spec.coefficientStd.size() == 1)
        coefStd.assign(spec.modes, spec.coefficientStd[0]);
    else if (static_cast<int>(spec.coefficientStd.size()) == spec.modes)
        coefStd = spec.coefficientStd;
    else
        throw std::invalid_argument("synthesize: coefficientStd needs 1 or modes entries");
    for (double c : coefStd)
        if (!(c > 0.0)) throw std::invalid_argument("synthesize: coefficientStd must be positive");
}

/* Removes from v its projection onto each column of Q (orthonormal). */
void project_out(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& Q) {
    for (const auto& q : Q) v -= q.dot(v) * q;
}

}  // namespace

std::pair<TrackTable, SyntheticGroundTruth> synthesize(const SyntheticSpec& spec) {
    std::vector<double> coefStd;
    validate_spec(spec, coefStd);
    const int I = spec.frames;
    const int J = spec.points;
    const int K = spec.modes;

    Rng rng(spec.seed);
    SyntheticGroundTruth truth;

    /* Scaled orthographic cameras: the projection rows of a random rotation
     * times a per-frame scale well above the deformation amplitude, so the
     * rigid part dominates the spectrum. */
    truth.M.resize(2 * I, 3);
    truth.t.resize(I, 2);
    for (int i = 0; i < I; ++i) {
        const Eigen::Matrix3d R = random_rotation(rng);
        const double s = rng.uniform(spec.cameraScaleMin, spec.cameraScaleMax);
        truth.M.middleRows(2 * i, 2) = s * R.topRows(2);
        truth.t(i, 0) = 20.0 * rng.gaussian();
        truth.t(i, 1) = 20.0 * rng.gaussian();
    }

    /* Mean shape with zero-mean rows, so image centroids equal the
     * translations exactly and centering removes them losslessly. */
    truth.B0.resize(3, J);
    for (int r = 0; r < 3; ++r) {
        Eigen::VectorXd row = 5.0 * rng.gaussianVector(J);
        row.array() -= row.mean();
        truth.B0.row(r) = row.transpose();
    }

    /* Orthonormal basis of the mean shape's row space, to keep the
     * deformation rows out of it. */
    std::vector<Eigen::VectorXd> rowBasis;
    for (int r = 0; r < 3; ++r) {
        Eigen::VectorXd q = truth.B0.row(r).transpose();
        project_out(q, rowBasis);
        const double n = q.norm();
        if (n > 1e-9) rowBasis.push_back(q / n);
    }

    truth.directions.resize(3, K);
    truth.modeRows.resize(K, J);
    for (int k = 0; k < K; ++k) {
        Eigen::Vector3d d;
        do {
            d = Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian());
        } while (d.norm() < 1e-6);
        truth.directions.col(k) = d.normalized();

        Eigen::VectorXd b;
        double n = 0.0;
        do {
            b = rng.gaussianVector(J);
            b.array() -= b.mean();
            project_out(b, rowBasis);
            n = b.norm();
        } while (n < 1e-6);
        b /= n;
        truth.modeRows.row(k) = b.transpose();
        rowBasis.push_back(b);
    }

    /* Coefficient columns made orthogonal, frame-weighted by the cameras,
     * to the rigid motion columns and to earlier modes. This is what lets
     * a truncated SVD of the assembled tracks split the rigid part and
     * each mode exactly instead of mixing them. */
    truth.alpha.resize(I, K);
    for (int k = 0; k < K; ++k) {
        std::vector<Eigen::VectorXd> constraints;
        const Eigen::Vector3d dk = truth.directions.col(k);
        for (int r = 0; r < 3; ++r) {
            Eigen::VectorXd v(I);
            for (int i = 0; i < I; ++i) {
                const Eigen::Matrix<double, 2, 3> Mi = truth.M.middleRows(2 * i, 2);
                v(i) = (Mi.transpose() * Mi * dk)(r);
            }
            constraints.push_back(v);
        }
        for (int l = 0; l < k; ++l) {
            const Eigen::Vector3d dl = truth.directions.col(l);
            Eigen::VectorXd v(I);
            for (int i = 0; i < I; ++i) {
                const Eigen::Matrix<double, 2, 3> Mi = truth.M.middleRows(2 * i, 2);
                v(i) = truth.alpha(i, l) * (dk.transpose() * Mi.transpose() * Mi * dl)(0);
            }
            constraints.push_back(v);
        }
        std::vector<Eigen::VectorXd> Q;
        for (Eigen::VectorXd c : constraints) {
            project_out(c, Q);
            const double n = c.norm();
            if (n > 1e-12) Q.push_back(c / n);
        }

        Eigen::VectorXd a;
        double n = 0.0;
        int tries = 0;
        do {
            a = rng.gaussianVector(I);
            project_out(a, Q);
            n = a.norm();
            if (++tries > 16)
                throw std::runtime_error("synthesize: could not draw separable coefficients");
        } while (n < 1e-8 * std::sqrt(static_cast<double>(I)));
        truth.alpha.col(k) = a * (coefStd[k] * std::sqrt(static_cast<double>(I)) / n);
    }

    Eigen::MatrixXd coords(2 * I, J);
    for (int i = 0; i < I; ++i) {
        Eigen::MatrixXd P = truth.B0;
        for (int k = 0; k < K; ++k)
            P += truth.alpha(i, k) * truth.directions.col(k) * truth.modeRows.row(k);
        const Matrix2Xd img = truth.M.middleRows(2 * i, 2) * P;
        coords.row(2 * i) = img.row(0).array() + truth.t(i, 0);
        coords.row(2 * i + 1) = img.row(1).array() + truth.t(i, 1);
    }

    /* Noise comes last so specs differing only in noiseStd share their
     * structure draw. */
    if (spec.noiseStd > 0.0) {
        for (int i = 0; i < 2 * I; ++i)
            for (int j = 0; j < J; ++j) coords(i, j) += spec.noiseStd * rng.gaussian();
    }

    return {TrackTable(std::move(coords)), std::move(truth)};
}

namespace {

json camera_json(const RigidFactor& rigid, const MatrixX2d& translations) {
    const int I = static_cast<int>(rigid.M0.rows() / 2);
    json cams = json::array();
    for (int i = 0; i < I; ++i) {
        json c;
        c["frame"] = i;
        c["m"] = {{rigid.M0(2 * i, 0), rigid.M0(2 * i, 1), rigid.M0(2 * i, 2)},
                  {rigid.M0(2 * i + 1, 0), rigid.M0(2 * i + 1, 1), rigid.M0(2 * i + 1, 2)}};
        c["t"] = {translations(i, 0), translations(i, 1)};
        cams.push_back(c);
    }
    json root;
    root["frames"] = I;
    root["cameras"] = cams;
    return root;
}

std::string csv_row(const Eigen::VectorXd& v) {
    std::string line;
    for (int i = 0; i < v.size(); ++i) {
        if (i) line += ',';
        line += format_double(v(i));
    }
    return line;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace

std::vector<std::string> export_results(const RigidFactor& rigid,
                                        const MatrixX2d& translations,
                                        const DeformationModel& model,
                                        const std::vector<DirectionSolution>& directions,
                                        const CoefficientMatrix& coefficients,
                                        const ReconstructionReport& report,
                                        const SolverConfig& solverCfg,
                                        const IcaConfig& icaCfg,
                                        const std::string& dir) {
    const int I = static_cast<int>(rigid.M0.rows() / 2);
    const int K = model.K;
    const int J = static_cast<int>(model.Bprime.cols());
    if (rigid.M0.rows() != 2 * I || rigid.M0.cols() != 3 || rigid.B0.rows() != 3 ||
        rigid.B0.cols() != J)
        throw std::invalid_argument("export_results: malformed rigid factor");
    if (translations.rows() != I)
        throw std::invalid_argument("export_results: translation count mismatch");
    if (static_cast<int>(directions.size()) != K || model.Bprime.rows() != K)
        throw std::invalid_argument("export_results: one direction per mode required");
    if (coefficients.alpha.rows() != I || coefficients.alpha.cols() != K)
        throw std::invalid_argument("export_results: coefficient shape mismatch");
    if (report.perFrameResiduals.size() != I)
        throw std::invalid_argument("export_results: per-frame residual count mismatch");

    /* Analysis attachments may be absent; derive them so the export is
     * complete either way. */
    Eigen::MatrixXd cov = coefficients.covariance;
    if (cov.size() == 0)
        cov = I >= 2 ? coefficient_covariance(coefficients.alpha)
                     : Eigen::MatrixXd::Zero(K, K);
    if (cov.rows() != K || cov.cols() != K)
        throw std::invalid_argument("export_results: covariance shape mismatch");
    std::vector<int> perm = coefficients.permutation;
    if (perm.empty()) perm = seriate_covariance(cov);
    if (static_cast<int>(perm.size()) != K)
        throw std::invalid_argument("export_results: permutation size mismatch");

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir + ": cannot create directory");

    std::vector<std::string> written;
    const auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(dir) / name).string();
        write_file(path, content);
        written.push_back(path);
    };

    emit("cameras.json", camera_json(rigid, translations).dump(2) + "\n");

    {
        std::string body;
        for (int r = 0; r < 3; ++r) body += csv_row(rigid.B0.row(r).transpose()) + "\n";
        emit("mean_shape.csv", body);
    }

    {
        json modes = json::array();
        for (int k = 0; k < K; ++k) {
            json mk;
            mk["mode"] = k + 1;
            mk["direction"] = {directions[k].d(0), directions[k].d(1), directions[k].d(2)};
            json row = json::array();
            for (int j = 0; j < J; ++j) row.push_back(model.Bprime(k, j));
            mk["row"] = row;
            mk["objective"] = directions[k].objective;
            mk["iterations"] = directions[k].iterations;
            mk["converged"] = directions[k].converged;
            mk["degenerate"] = directions[k].degenerate;
            mk["restartSpread"] = directions[k].restartSpread;
            modes.push_back(mk);
        }
        json root;
        root["variant"] = to_string(model.variant);
        root["K"] = K;
        root["modes"] = modes;
        emit("modes.json", root.dump(2) + "\n");
    }

    {
        std::string body = "frame";
        for (int k = 1; k <= K; ++k) body += ",a" + std::to_string(k);
        body += "\n";
        for (int i = 0; i < I; ++i) {
            body += std::to_string(i);
            for (int k = 0; k < K; ++k)
                body += "," + format_double(coefficients.alpha(i, k));
            body += "\n";
        }
        emit("coefficients.csv", body);
    }

    {
        std::string body;
        for (int p = 0; p < K; ++p) body += csv_row(cov.row(p).transpose()) + "\n";
        body += "permutation";
        for (int p : perm) body += "," + std::to_string(p);
        body += "\n";
        emit("covariance.csv", body);
    }

    {
        json cfg;
        cfg["K"] = K;
        cfg["variant"] = to_string(model.variant);
        cfg["solver"] = {{"tol", solverCfg.tol},
                         {"maxIters", solverCfg.maxIters},
                         {"numStarts", solverCfg.numStarts}};
        cfg["ica"] = {{"contrast", to_string(icaCfg.contrast)},
                      {"tol", icaCfg.tol},
                      {"maxIters", icaCfg.maxIters},
                      {"centerRows", icaCfg.centerRows}};
        json root;
        root["inverseSnrPercent"] = report.inverseSnrPercent;
        json pfr = json::array();
        for (int i = 0; i < I; ++i) pfr.push_back(report.perFrameResiduals(i));
        root["perFrameResiduals"] = pfr;
        json es = json::array();
        for (int s = 0; s < report.energySpectrum.size(); ++s)
            es.push_back(report.energySpectrum(s));
        root["energySpectrum"] = es;
        root["config"] = cfg;
        emit("report.json", root.dump(2) + "\n");
    }

    /* Mean shape displaced along each mode by twice the coefficient spread,
     * a ready-to-plot summary of what the mode does. */
    for (int k = 0; k < K; ++k) {
        double sd = 0.0;
        if (I >= 2) {
            const Eigen::VectorXd col = coefficients.alpha.col(k);
            const Eigen::VectorXd c = col.array() - col.mean();
            sd = std::sqrt(c.squaredNorm() / static_cast<double>(I - 1));
        }
        const double a = 2.0 * sd;
        const Eigen::MatrixXd delta =
            a * directions[k].d * model.Bprime.row(k);
        std::string body;
        for (int r = 0; r < 3; ++r)
            body += csv_row((rigid.B0.row(r) + delta.row(r)).transpose()) + "\n";
        for (int r = 0; r < 3; ++r)
            body += csv_row((rigid.B0.row(r) - delta.row(r)).transpose()) + "\n";
        emit("mode_" + std::to_string(k + 1) + "_perturbation.csv", body);
    }

    return written;
}

ExportedResults load_results(const std::string& dir) {
    ExportedResults out;
    const fs::path base(dir);

    {
        const json root = load_json((base / "cameras.json").string());
        if (!root.contains("frames") || !root.contains("cameras"))
            throw std::runtime_error(dir + "/cameras.json: needs 'frames' and 'cameras'");
        const int I = root["frames"].get<int>();
        if (I < 1 || static_cast<int>(root["cameras"].size()) != I)
            throw std::runtime_error(dir + "/cameras.json: camera count mismatch");
        out.M0.resize(2 * I, 3);
        out.translations.resize(I, 2);
        for (const auto& c : root["cameras"]) {
            const int i = c.at("frame").get<int>();
            if (i < 0 || i >= I)
                throw std::runtime_error(dir + "/cameras.json: frame index out of range");
            for (int r = 0; r < 2; ++r)
                for (int col = 0; col < 3; ++col)
                    out.M0(2 * i + r, col) = c.at("m").at(r).at(col).get<double>();
            out.translations(i, 0) = c.at("t").at(0).get<double>();
            out.translations(i, 1) = c.at("t").at(1).get<double>();
        }
    }

    {
        const std::string path = (base / "mean_shape.csv").string();
        const std::vector<std::string> lines = read_lines(path);
        if (lines.size() < 3) throw std::runtime_error(path + ": expected 3 rows");
        for (int r = 0; r < 3; ++r) {
            const auto fields = split_csv_line(lines[r]);
            if (r == 0) out.B0.resize(3, static_cast<int>(fields.size()));
            if (static_cast<int>(fields.size()) != out.B0.cols())
                throw std::runtime_error(path + ": ragged rows");
            try {
                for (std::size_t j = 0; j < fields.size(); ++j)
                    out.B0(r, static_cast<int>(j)) = parse_double(fields[j]);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(path + ": " + e.what());
            }
        }
    }

    {
        const std::string path = (base / "modes.json").string();
        const json root = load_json(path);
        out.variant = variant_from_string(root.at("variant").get<std::string>());
        const int K = root.at("K").get<int>();
        if (K < 1 || static_cast<int>(root.at("modes").size()) != K)
            throw std::runtime_error(path + ": mode count mismatch");
        out.directions.resize(3, K);
        out.modeRows.resize(K, out.B0.cols());
        out.objectives.resize(K);
        out.degenerate.resize(K);
        for (const auto& mk : root.at("modes")) {
            const int k = mk.at("mode").get<int>() - 1;
            if (k < 0 || k >= K)
                throw std::runtime_error(path + ": mode index out of range");
            for (int r = 0; r < 3; ++r)
                out.directions(r, k) = mk.at("direction").at(r).get<double>();
            const auto& row = mk.at("row");
            if (static_cast<int>(row.size()) != out.modeRows.cols())
                throw std::runtime_error(path + ": row length mismatch");
            for (int j = 0; j < out.modeRows.cols(); ++j)
                out.modeRows(k, j) = row.at(j).get<double>();
            out.objectives[k] = mk.at("objective").get<double>();
            out.degenerate[k] = mk.at("degenerate").get<bool>();
        }
    }

    {
        const std::string path = (base / "coefficients.csv").string();
        const std::vector<std::string> lines = read_lines(path);
        if (lines.empty()) throw std::runtime_error(path + ": empty file");
        const auto header = split_csv_line(lines[0]);
        const int K = static_cast<int>(header.size()) - 1;
        if (K != out.modes() || header[0] != "frame")
            throw std::runtime_error(path + ": header does not match modes.json");
        std::vector<std::vector<double>> rows;
        for (std::size_t n = 1; n < lines.size(); ++n) {
            if (lines[n].empty()) continue;
            const auto fields = split_csv_line(lines[n]);
            if (static_cast<int>(fields.size()) != K + 1)
                throw std::runtime_error(path + ": ragged row at line " +
                                         std::to_string(n + 1));
            try {
                if (parse_long(fields[0]) != static_cast<long>(rows.size()))
                    throw std::runtime_error("frames out of order");
                std::vector<double> vals;
                for (int k = 1; k <= K; ++k) vals.push_back(parse_double(fields[k]));
                rows.push_back(vals);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(path + ": line " + std::to_string(n + 1) + ": " +
                                         e.what());
            }
        }
        if (static_cast<int>(rows.size()) != out.frames())
            throw std::runtime_error(path + ": frame count does not match cameras.json");
        out.alpha.resize(rows.size(), K);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (int k = 0; k < K; ++k) out.alpha(static_cast<int>(i), k) = rows[i][k];
    }

    {
        const std::string path = (base / "covariance.csv").string();
        const std::vector<std::string> lines = read_lines(path);
        const int K = out.modes();
        if (static_cast<int>(lines.size()) < K + 1)
            throw std::runtime_error(path + ": expected K rows plus a permutation line");
        out.covariance.resize(K, K);
        try {
            for (int p = 0; p < K; ++p) {
                const auto fields = split_csv_line(lines[p]);
                if (static_cast<int>(fields.size()) != K)
                    throw std::runtime_error("ragged covariance row");
                for (int q = 0; q < K; ++q) out.covariance(p, q) = parse_double(fields[q]);
            }
            const auto permLine = split_csv_line(lines[K]);
            if (permLine.empty() || permLine[0] != "permutation" ||
                static_cast<int>(permLine.size()) != K + 1)
                throw std::runtime_error("malformed permutation line");
            for (int p = 1; p <= K; ++p)
                out.permutation.push_back(static_cast<int>(parse_long(permLine[p])));
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(path + ": " + e.what());
        }
    }

    {
        const json root = load_json((base / "report.json").string());
        out.inverseSnrPercent = root.at("inverseSnrPercent").get<double>();
    }

    return out;
}

}  // namespace r1nrsfm
