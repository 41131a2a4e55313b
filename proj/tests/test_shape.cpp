#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qkflow/shape.hpp"

using namespace qkf;
using namespace qkf::shape;

TEST_CASE("zero gradient leaves the hessian unchanged")
{
    Eigen::MatrixXd h(2, 2);
    h << 0.7, 0.2, 0.2, -0.4;
    const ShapeMatrix s = weingarten({Eigen::VectorXd::Zero(2), h});
    CHECK((s.a - h).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(s.w == 1.0);
    CHECK(s.nu_vertical == 1.0);
}

TEST_CASE("affine graphs are flat")
{
    Eigen::VectorXd g(3);
    g << 1.0, -2.0, 0.5;
    const ShapeMatrix s = weingarten({g, Eigen::MatrixXd::Zero(3, 3)});
    CHECK(s.a.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.nu_vertical * s.w == doctest::Approx(1.0).epsilon(1e-16));
}

TEST_CASE("radial profile with critical point at the origin")
{
    const double c = -0.8;
    const ShapeMatrix s = weingarten({Eigen::VectorXd::Zero(3),
                                      c * Eigen::MatrixXd::Identity(3, 3)});
    CHECK((s.a - c * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("hemisphere jets give constant principal curvatures")
{
    Rng rng(31);
    const double radius = 2.5;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(1, 3);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (double& xi : x) xi = rng.uniform(-0.9, 0.9);

        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        oracle::sphere_jets(x, radius, grad, hess);
        const CurvatureVector lam = principal_curvatures(weingarten({grad, hess}));
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(lam[i] - 1.0 / radius) <= 1e-10);
    }
}

TEST_CASE("convex bump has positive curvatures")
{
    // paraboloid |x|^2/2: upward normal orientation makes both curvatures +1
    const ShapeMatrix s = weingarten({Eigen::VectorXd::Zero(2),
                                      Eigen::MatrixXd::Identity(2, 2)});
    const CurvatureVector lam = principal_curvatures(s);
    CHECK(lam[0] == doctest::Approx(1.0));
    CHECK(lam[1] == doctest::Approx(1.0));
}

TEST_CASE("principal curvatures of explicit matrices")
{
    ShapeMatrix s;
    s.a = Eigen::MatrixXd::Zero(2, 2);
    s.a(0, 0) = 3.0;
    s.a(1, 1) = 1.0;
    CurvatureVector lam = principal_curvatures(s);
    CHECK(lam[0] == doctest::Approx(3.0));
    CHECK(lam[1] == doctest::Approx(1.0));

    s.a << 0.0, 1.0, 1.0, 0.0;
    lam = principal_curvatures(s);
    CHECK(lam[0] == doctest::Approx(1.0));
    CHECK(lam[1] == doctest::Approx(-1.0));
}

TEST_CASE("rotation equivariance of the shape matrix")
{
    Rng rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.uniform_int(2, 5);
        Eigen::VectorXd g(n);
        Eigen::MatrixXd h(n, n);
        for (int i = 0; i < n; ++i) {
            g(i) = rng.uniform(-1.5, 1.5);
            for (int j = i; j < n; ++j) {
                h(i, j) = rng.uniform(-2.0, 2.0);
                h(j, i) = h(i, j);
            }
        }
        const Eigen::MatrixXd q = oracle::random_orthogonal(rng, n);

        const ShapeMatrix s = weingarten({g, h});
        const ShapeMatrix sr = weingarten({q * g, q * h * q.transpose()});

        CHECK((sr.a - q * s.a * q.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        const CurvatureVector a = principal_curvatures(s);
        const CurvatureVector b = principal_curvatures(sr);
        for (int i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
    }
}

TEST_CASE("pointwise geometry and the pinching gate")
{
    ShapeMatrix s;
    s.a = Eigen::MatrixXd::Identity(2, 2);
    const PointGeometry g = pointwise_geometry(s, 1);
    CHECK(g.mean_curvature == doctest::Approx(2.0));
    CHECK(g.norm_sq_a == doctest::Approx(2.0));
    CHECK(g.pinch_ok);
    CHECK(g.qk.has_value());
    CHECK(*g.qk == doctest::Approx(0.5));

    // S_2 < 0: only the first cone, quotient for k=2 absent
    ShapeMatrix t;
    t.a = Eigen::MatrixXd::Zero(3, 3);
    t.a(0, 0) = 2.0;
    t.a(1, 1) = -1.0;
    t.a(2, 2) = -1.0;
    const PointGeometry gt = pointwise_geometry(t, 2);
    CHECK(gt.cone.k == 0); // S_1 = 0 here, so no nontrivial cone is entered
    CHECK_FALSE(gt.cone.interior_at_least(2));
    CHECK_FALSE(gt.qk.has_value());

    // inside the second cone the gap is 2 S_2 > 0
    Rng rng(33);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = rng.uniform_int(2, 6);
        const CurvatureVector lam = oracle::random_cone_vector(rng, n, 2);
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            sum += lam[i];
            sq += lam[i] * lam[i];
        }
        CHECK(sq <= sum * sum);
    }
}

TEST_CASE("asymmetric hessian is rejected")
{
    Eigen::MatrixXd h(2, 2);
    h << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS((void)weingarten({Eigen::VectorXd::Zero(2), h}), ShapeError);
}
