#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "r1nrsfm/factorize.hpp"
#include "r1nrsfm/recovery.hpp"

#include <Eigen/Geometry>

#include <cmath>

using namespace r1nrsfm;

namespace {

Matrix23d random_camera(oracles::TestRng& rng) {
    const Eigen::Quaterniond q(rng.gaussian(), rng.gaussian(), rng.gaussian(),
                               rng.gaussian());
    return rng.uniform(40.0, 60.0) *
           q.normalized().toRotationMatrix().topRows<2>();
}

/* A camera stack is all the recovery routines need from the rigid step. */
RigidFactor fake_rigid(oracles::TestRng& rng, int frames) {
    RigidFactor rigid;
    rigid.M0.resize(2 * frames, 3);
    for (int i = 0; i < frames; ++i) rigid.M0.middleRows(2 * i, 2) = random_camera(rng);
    return rigid;
}

Eigen::Vector3d random_unit(oracles::TestRng& rng) {
    Eigen::Vector3d v(rng.gaussian(), rng.gaussian(), rng.gaussian());
    return v.normalized();
}

/* Residual built from planted modes: dW^i = sum_k alpha(i,k) M0^i d_k b_k^T. */
Eigen::MatrixXd planted_residual(const RigidFactor& rigid, const Eigen::MatrixXd& B,
                                 const Matrix3Xd& directions,
                                 const Eigen::MatrixXd& alpha) {
    const int I = static_cast<int>(rigid.M0.rows() / 2);
    Eigen::MatrixXd deltaW = Eigen::MatrixXd::Zero(2 * I, B.cols());
    for (int i = 0; i < I; ++i)
        for (int k = 0; k < B.rows(); ++k)
            deltaW.middleRows(2 * i, 2) +=
                alpha(i, k) * (rigid.camera(i) * directions.col(k)) * B.row(k);
    return deltaW;
}

}  // namespace

TEST_CASE("direction problem data matches a hand computation") {
    RigidFactor rigid;
    rigid.M0.resize(2, 3);
    rigid.M0 << 1, 2, 3, 4, 5, 6;
    Eigen::MatrixXd deltaW(2, 2);
    deltaW << 7, 8, 9, 10;
    Eigen::VectorXd b(2);
    b << 1, -1;

    const RayleighSumProblem p = direction_problem(deltaW, rigid, b);
    CHECK(p.frames() == 1);
    CHECK((p.g[0] - Eigen::Vector3d(-5, -7, -9)).norm() == 0.0);
    const Eigen::Matrix3d expected =
        2.0 * rigid.M0.transpose() * rigid.M0;
    CHECK((p.H[0] - expected).norm() == 0.0);

    CHECK_THROWS_AS(direction_problem(deltaW, rigid, Eigen::VectorXd::Ones(3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(direction_problem(Eigen::MatrixXd::Zero(4, 2), rigid, b),
                    std::invalid_argument);
}

TEST_CASE("the reduced objective equals the explicit per-frame fit gain") {
    oracles::TestRng rng(201);
    const RigidFactor rigid = fake_rigid(rng, 6);
    const Eigen::MatrixXd deltaW = rng.gaussianMatrix(12, 9);
    const Eigen::VectorXd b = rng.gaussianMatrix(9, 1);
    const RayleighSumProblem p = direction_problem(deltaW, rigid, b);

    for (int rep = 0; rep < 12; ++rep) {
        const Eigen::Vector3d d = random_unit(rng);
        const double reduced = rayleigh_sum_objective(p, d);
        const double unreduced =
            oracles::unreduced_direction_objective(deltaW, rigid.M0, b, d);
        CHECK(reduced == doctest::Approx(unreduced).epsilon(1e-9));

        const double residual =
            oracles::unreduced_direction_residual(deltaW, rigid.M0, b, d);
        CHECK(residual ==
              doctest::Approx(deltaW.squaredNorm() - reduced).epsilon(1e-9));
    }
}

TEST_CASE("a planted direction is recovered with all energy explained") {
    oracles::TestRng rng(211);
    const int I = 8, J = 10;
    const RigidFactor rigid = fake_rigid(rng, I);
    const Eigen::Vector3d dTrue = random_unit(rng);
    Matrix3Xd directions(3, 1);
    directions.col(0) = dTrue;
    const Eigen::MatrixXd B = rng.gaussianMatrix(1, J);
    const Eigen::MatrixXd alpha = rng.gaussianMatrix(I, 1);
    const Eigen::MatrixXd deltaW = planted_residual(rigid, B, directions, alpha);

    const std::vector<DirectionSolution> sols = solve_directions(deltaW, rigid, B);
    REQUIRE(sols.size() == 1);
    CHECK(sols[0].converged);
    CHECK(!sols[0].degenerate);
    CHECK(std::abs(sols[0].d.dot(dTrue)) > 1.0 - 1e-8);
    CHECK(sols[0].objective ==
          doctest::Approx(deltaW.squaredNorm()).epsilon(1e-9));
}

TEST_CASE("modes with orthogonal rows are recovered independently") {
    oracles::TestRng rng(223);
    const int I = 9, J = 11;
    const RigidFactor rigid = fake_rigid(rng, I);

    Eigen::MatrixXd B = rng.gaussianMatrix(2, J);
    B.row(1) -= (B.row(1).dot(B.row(0)) / B.row(0).squaredNorm()) * B.row(0);
    Matrix3Xd directions(3, 2);
    directions.col(0) = random_unit(rng);
    directions.col(1) = random_unit(rng);
    const Eigen::MatrixXd alpha = rng.gaussianMatrix(I, 2);
    const Eigen::MatrixXd deltaW = planted_residual(rigid, B, directions, alpha);

    const std::vector<DirectionSolution> sols = solve_directions(deltaW, rigid, B);
    REQUIRE(sols.size() == 2);
    for (int k = 0; k < 2; ++k) {
        CHECK(sols[k].converged);
        CHECK(std::abs(sols[k].d.dot(directions.col(k))) > 1.0 - 1e-8);
    }
}

TEST_CASE("a zeroed mode row is flagged instead of solved") {
    oracles::TestRng rng(227);
    const RigidFactor rigid = fake_rigid(rng, 4);
    Eigen::MatrixXd B = rng.gaussianMatrix(2, 7);
    B.row(1).setZero();
    const Eigen::MatrixXd deltaW = rng.gaussianMatrix(8, 7);

    const std::vector<DirectionSolution> sols = solve_directions(deltaW, rigid, B);
    CHECK(!sols[0].degenerate);
    CHECK(sols[1].degenerate);
    CHECK(sols[1].converged);
    CHECK(sols[1].objective == 0.0);

    CHECK_THROWS_AS(solve_directions(deltaW, rigid, rng.gaussianMatrix(2, 8)),
                    std::invalid_argument);
}

TEST_CASE("basis shapes are the advertised rank-1 operators") {
    oracles::TestRng rng(229);
    const int I = 5, J = 8, K = 2;
    const RigidFactor rigid = fake_rigid(rng, I);
    const Eigen::MatrixXd B = rng.gaussianMatrix(K, J);
    Matrix3Xd directions(3, K);
    for (int k = 0; k < K; ++k) directions.col(k) = random_unit(rng);

    const BasisShapeSet shapes = form_basis_shapes(rigid, B, directions);
    CHECK(shapes.frames == I);
    CHECK(shapes.modes == K);
    for (int i = 0; i < I; ++i) {
        for (int k = 0; k < K; ++k) {
            const RankOneBasisShape& s = shapes.at(i, k);
            CHECK(s.frame == i);
            CHECK(s.mode == k);
            const Eigen::MatrixXd expected =
                (rigid.camera(i) * directions.col(k)) * B.row(k);
            CHECK((s.op - expected).norm() < 1e-12 * expected.norm());
            CHECK(s.frobNorm == doctest::Approx(s.op.norm()).epsilon(1e-12));
            CHECK(!s.zero);
            CHECK(s.unit().norm() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("shapes whose operator vanishes are flagged zero") {
    oracles::TestRng rng(233);
    RigidFactor rigid;
    rigid.M0.resize(2, 3);
    rigid.M0 << 1, 0, 0, 0, 1, 0;  /* direction e3 is invisible */
    Eigen::MatrixXd B = rng.gaussianMatrix(1, 6);
    Matrix3Xd directions(3, 1);
    directions.col(0) = Eigen::Vector3d::UnitZ();

    const BasisShapeSet shapes = form_basis_shapes(rigid, B, directions);
    CHECK(shapes.at(0, 0).zero);
    CHECK_THROWS_AS(shapes.at(0, 0).unit(), std::domain_error);

    directions.col(0) = Eigen::Vector3d(1.0, 1.0, 0.0);  /* not unit */
    CHECK_THROWS_AS(form_basis_shapes(rigid, B, directions), std::invalid_argument);
    CHECK_THROWS_AS(form_basis_shapes(rigid, rng.gaussianMatrix(2, 6),
                                      Matrix3Xd(3, 1)),
                    std::invalid_argument);
}

TEST_CASE("projected coefficients equal the per-frame least-squares solution") {
    oracles::TestRng rng(239);
    const int I = 7, J = 9, K = 3;
    const RigidFactor rigid = fake_rigid(rng, I);
    /* Orthogonal rows decouple the per-frame fit, which is exactly the
     * regime the low-rank split hands over. */
    const Eigen::MatrixXd B = nonrigid_factor(rng.gaussianMatrix(2 * I, J), K).Bprime;
    Matrix3Xd directions(3, K);
    for (int k = 0; k < K; ++k) directions.col(k) = random_unit(rng);
    const Eigen::MatrixXd deltaW = rng.gaussianMatrix(2 * I, J);

    const BasisShapeSet shapes = form_basis_shapes(rigid, B, directions);
    const CoefficientMatrix cm = project_coefficients(deltaW, shapes);
    const Eigen::MatrixXd ls = oracles::ls_coefficients(deltaW, shapes);
    CHECK((cm.alpha - ls).cwiseAbs().maxCoeff() < 1e-9 * cm.alpha.cwiseAbs().maxCoeff());

    CHECK(cm.covariance.size() == 0);
    CHECK(cm.permutation.empty());
}

TEST_CASE("perturbing any projected coefficient worsens the fit") {
    oracles::TestRng rng(241);
    const int I = 5, J = 8, K = 2;
    const RigidFactor rigid = fake_rigid(rng, I);
    const Eigen::MatrixXd B = nonrigid_factor(rng.gaussianMatrix(2 * I, J), K).Bprime;
    Matrix3Xd directions(3, K);
    for (int k = 0; k < K; ++k) directions.col(k) = random_unit(rng);
    const Eigen::MatrixXd deltaW = rng.gaussianMatrix(2 * I, J);

    const BasisShapeSet shapes = form_basis_shapes(rigid, B, directions);
    const CoefficientMatrix cm = project_coefficients(deltaW, shapes);
    const double base = (deltaW - reconstruct_residual(shapes, cm.alpha)).squaredNorm();

    for (int i = 0; i < I; ++i) {
        for (int k = 0; k < K; ++k) {
            for (const double eps : {0.05, -0.05}) {
                Eigen::MatrixXd bumped = cm.alpha;
                bumped(i, k) += eps;
                const double cost =
                    (deltaW - reconstruct_residual(shapes, bumped)).squaredNorm();
                CHECK(cost > base);
            }
        }
    }
}

TEST_CASE("squared coefficients add up to the direction objective") {
    oracles::TestRng rng(251);
    const int I = 6, J = 10;
    const RigidFactor rigid = fake_rigid(rng, I);
    const Eigen::MatrixXd B = rng.gaussianMatrix(1, J);
    const Eigen::MatrixXd deltaW = rng.gaussianMatrix(2 * I, J);
    const Eigen::Vector3d d = random_unit(rng);

    Matrix3Xd directions(3, 1);
    directions.col(0) = d;
    const BasisShapeSet shapes = form_basis_shapes(rigid, B, directions);
    const CoefficientMatrix cm = project_coefficients(deltaW, shapes);

    const double objective =
        rayleigh_sum_objective(direction_problem(deltaW, rigid, B.row(0).transpose()), d);
    CHECK(cm.alpha.col(0).squaredNorm() == doctest::Approx(objective).epsilon(1e-9));
}

TEST_CASE("reconstruction is exact on planted data and validates its inputs") {
    oracles::TestRng rng(257);
    const int I = 6, J = 9;
    const RigidFactor rigid = fake_rigid(rng, I);
    Eigen::MatrixXd B = rng.gaussianMatrix(2, J);
    B.row(1) -= (B.row(1).dot(B.row(0)) / B.row(0).squaredNorm()) * B.row(0);
    Matrix3Xd directions(3, 2);
    directions.col(0) = random_unit(rng);
    directions.col(1) = random_unit(rng);
    const Eigen::MatrixXd alphaTrue = rng.gaussianMatrix(I, 2);
    const Eigen::MatrixXd deltaW = planted_residual(rigid, B, directions, alphaTrue);

    const BasisShapeSet shapes = form_basis_shapes(rigid, B, directions);
    const CoefficientMatrix cm = project_coefficients(deltaW, shapes);
    const Eigen::MatrixXd recon = reconstruct_residual(shapes, cm.alpha);
    CHECK((recon - deltaW).norm() < 1e-9 * deltaW.norm());

    CHECK_THROWS_AS(reconstruct_residual(shapes, rng.gaussianMatrix(I, 3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(project_coefficients(rng.gaussianMatrix(2 * I, J + 1), shapes),
                    std::invalid_argument);
}
