#include "oracles.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "r1nrsfm/analysis.hpp"

namespace fs = std::filesystem;

namespace oracles {

JacobiEigen jacobi_eigen_sym(Eigen::MatrixXd A) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw std::invalid_argument("jacobi: square matrix required");
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);

    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (std::sqrt(off) < 1e-15 * scale * n) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                const double tau = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int r = 0; r < n; ++r) {
                    const double arp = A(r, p), arq = A(r, q);
                    A(r, p) = c * arp - s * arq;
                    A(r, q) = s * arp + c * arq;
                }
                for (int r = 0; r < n; ++r) {
                    const double apr = A(p, r), aqr = A(q, r);
                    A(p, r) = c * apr - s * aqr;
                    A(q, r) = s * apr + c * aqr;
                }
                for (int r = 0; r < n; ++r) {
                    const double vrp = V(r, p), vrq = V(r, q);
                    V(r, p) = c * vrp - s * vrq;
                    V(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return A(a, a) > A(b, b); });

    JacobiEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values(i) = A(order[i], order[i]);
        out.vectors.col(i) = V.col(order[i]);
    }
    return out;
}

Eigen::MatrixXd kron_b_M(const Eigen::VectorXd& b, const r1nrsfm::Matrix23d& M) {
    const int J = static_cast<int>(b.size());
    Eigen::MatrixXd K(2 * J, 3);
    for (int j = 0; j < J; ++j) K.middleRows(2 * j, 2) = b(j) * M;
    return K;
}

Eigen::VectorXd vec_colmajor(const Eigen::MatrixXd& A) {
    Eigen::VectorXd v(A.size());
    int n = 0;
    for (int j = 0; j < A.cols(); ++j)
        for (int r = 0; r < A.rows(); ++r) v(n++) = A(r, j);
    return v;
}

double unreduced_direction_objective(const Eigen::MatrixXd& deltaW,
                                     const Eigen::MatrixXd& M0,
                                     const Eigen::VectorXd& bk,
                                     const Eigen::Vector3d& d) {
    const int I = static_cast<int>(deltaW.rows() / 2);
    double f = 0.0;
    for (int i = 0; i < I; ++i) {
        const r1nrsfm::Matrix23d Mi = M0.middleRows(2 * i, 2);
        const Eigen::MatrixXd K = kron_b_M(bk, Mi);
        const Eigen::VectorXd w = vec_colmajor(deltaW.middleRows(2 * i, 2));
        const Eigen::VectorXd Kd = K * d;
        const double den = Kd.squaredNorm();
        if (den <= 1e-14 * K.squaredNorm() * d.squaredNorm()) continue;
        const double num = Kd.dot(w);
        f += num * num / den;
    }
    return f;
}

double unreduced_direction_residual(const Eigen::MatrixXd& deltaW,
                                    const Eigen::MatrixXd& M0,
                                    const Eigen::VectorXd& bk,
                                    const Eigen::Vector3d& d) {
    const int I = static_cast<int>(deltaW.rows() / 2);
    double r = 0.0;
    for (int i = 0; i < I; ++i) {
        const r1nrsfm::Matrix23d Mi = M0.middleRows(2 * i, 2);
        const Eigen::MatrixXd K = kron_b_M(bk, Mi);
        const Eigen::VectorXd w = vec_colmajor(deltaW.middleRows(2 * i, 2));
        const Eigen::VectorXd Kd = K * d;
        const double den = Kd.squaredNorm();
        if (den <= 1e-14 * K.squaredNorm() * d.squaredNorm()) {
            r += w.squaredNorm();
            continue;
        }
        const double alpha = Kd.dot(w) / den;
        r += (w - alpha * Kd).squaredNorm();
    }
    return r;
}

std::vector<Eigen::Vector3d> sphere_grid(double stepDeg) {
    std::vector<Eigen::Vector3d> dirs;
    const double rad = std::numbers::pi / 180.0;
    for (double theta = 0.0; theta <= 90.0 + 1e-9; theta += stepDeg) {
        const double st = std::sin(theta * rad), ct = std::cos(theta * rad);
        if (theta == 0.0) {
            dirs.emplace_back(0.0, 0.0, 1.0);
            continue;
        }
        for (double phi = 0.0; phi < 360.0 - 1e-9; phi += stepDeg)
            dirs.emplace_back(st * std::cos(phi * rad), st * std::sin(phi * rad), ct);
    }
    return dirs;
}

double grid_best_objective(const Eigen::MatrixXd& deltaW, const Eigen::MatrixXd& M0,
                           const Eigen::VectorXd& bk, double stepDeg) {
    double best = -1.0;
    for (const Eigen::Vector3d& d : sphere_grid(stepDeg))
        best = std::max(best, unreduced_direction_objective(deltaW, M0, bk, d));
    return best;
}

Eigen::MatrixXd two_pass_covariance(const Eigen::MatrixXd& alpha) {
    const int I = static_cast<int>(alpha.rows());
    const int K = static_cast<int>(alpha.cols());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(K);
    for (int i = 0; i < I; ++i) mean += alpha.row(i).transpose();
    mean /= static_cast<double>(I);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(K, K);
    for (int i = 0; i < I; ++i) {
        const Eigen::VectorXd c = alpha.row(i).transpose() - mean;
        C += c * c.transpose();
    }
    return C / static_cast<double>(I - 1);
}

double exhaustive_seriation_cost(const Eigen::MatrixXd& C) {
    const int K = static_cast<int>(C.rows());
    if (K > 8) throw std::invalid_argument("exhaustive seriation limited to K <= 8");
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    double best = r1nrsfm::seriation_objective(C, perm);
    while (std::next_permutation(perm.begin(), perm.end()))
        best = std::min(best, r1nrsfm::seriation_objective(C, perm));
    return best;
}

Eigen::MatrixXd ls_coefficients(const Eigen::MatrixXd& deltaW,
                                const r1nrsfm::BasisShapeSet& shapes) {
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(shapes.frames, shapes.modes);
    for (int i = 0; i < shapes.frames; ++i) {
        std::vector<int> live;
        for (int k = 0; k < shapes.modes; ++k)
            if (!shapes.at(i, k).zero) live.push_back(k);
        if (live.empty()) continue;
        const int J = static_cast<int>(shapes.at(i, live[0]).op.cols());
        Eigen::MatrixXd A(2 * J, static_cast<int>(live.size()));
        for (std::size_t c = 0; c < live.size(); ++c) {
            const auto& s = shapes.at(i, live[c]);
            A.col(static_cast<int>(c)) = vec_colmajor(s.op / s.frobNorm);
        }
        const Eigen::VectorXd w = vec_colmajor(deltaW.middleRows(2 * i, 2));
        const Eigen::VectorXd x = A.colPivHouseholderQr().solve(w);
        for (std::size_t c = 0; c < live.size(); ++c)
            alpha(i, live[c]) = x(static_cast<int>(c));
    }
    return alpha;
}

double noise_floor_percent(const Eigen::MatrixXd& Wnoisy, const Eigen::MatrixXd& Wclean,
                           int K) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Wclean, Eigen::ComputeThinU);
    const Eigen::MatrixXd U = svd.matrixU().leftCols(K + 3);
    const Eigen::MatrixXd N = Wnoisy - Wclean;
    const Eigen::MatrixXd Nperp = N - U * (U.transpose() * N);
    return 100.0 * Nperp.norm() / Wnoisy.norm();
}

double abs_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("abs_correlation: length mismatch");
    const Eigen::VectorXd ac = a.array() - a.mean();
    const Eigen::VectorXd bc = b.array() - b.mean();
    const double den = ac.norm() * bc.norm();
    if (den == 0.0) return 0.0;
    return std::abs(ac.dot(bc)) / den;
}

double TestRng::gaussian() {
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

Eigen::MatrixXd TestRng::gaussianMatrix(int rows, int cols) {
    Eigen::MatrixXd M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) M(r, c) = gaussian();
    return M;
}

TempDir::TempDir() {
    static int counter = 0;
    const fs::path base = fs::temp_directory_path();
    fs::path p;
    do {
        p = base / ("r1nrsfm_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    } while (fs::exists(p));
    fs::create_directories(p);
    path_ = p.string();
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const {
    return (fs::path(path_) / name).string();
}

CommandResult run_command(const std::string& cmd) {
    CommandResult res;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, n);
    const int status = pclose(pipe);
    res.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

bool files_equal(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    return ca == cb;
}

std::vector<std::string> list_files(const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace oracles
