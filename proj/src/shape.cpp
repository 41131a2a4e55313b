#include "qkflow/shape.hpp"

#include <cmath>

namespace qkf::shape {

ShapeMatrix weingarten(const JetPoint& jet)
{
    const int n = static_cast<int>(jet.grad.size());
    CurvatureVector::check_dim(n);
    if (jet.hess.rows() != n || jet.hess.cols() != n)
        throw ShapeError("hessian dimension does not match gradient");
    const double hscale = std::max(1.0, jet.hess.cwiseAbs().maxCoeff());
    if ((jet.hess - jet.hess.transpose()).cwiseAbs().maxCoeff() > 1e-14 * hscale)
        throw ShapeError("hessian must be symmetric");

    const Eigen::VectorXd& g = jet.grad;
    const Eigen::MatrixXd& h = jet.hess;
    const double w = std::sqrt(1.0 + g.squaredNorm());
    const double c1 = 1.0 / (w * (1.0 + w));

    const Eigen::VectorXd q = h * g;
    const double gq = g.dot(q);

    ShapeMatrix s;
    s.a = (h - c1 * (g * q.transpose() + q * g.transpose()) +
           (c1 * c1 * gq) * (g * g.transpose())) /
          w;
    s.a = 0.5 * (s.a + s.a.transpose().eval()); // kill roundoff asymmetry
    s.w = w;
    s.nu_vertical = 1.0 / w;
    return s;
}

CurvatureVector principal_curvatures(const ShapeMatrix& s)
{
    return symfunc::eigenvalues_sym(s.a);
}

PointGeometry pointwise_geometry(const ShapeMatrix& s, int k)
{
    const CurvatureVector lam = principal_curvatures(s);

    PointGeometry g;
    g.cone = symfunc::cone_classify(lam);
    for (int i = 0; i < lam.size(); ++i) {
        g.mean_curvature += lam[i];
        g.norm_sq_a += lam[i] * lam[i];
    }
    try {
        g.qk = symfunc::qk(lam, k);
    } catch (const DomainError&) {
        g.qk = std::nullopt;
    }
    const double h2 = g.mean_curvature * g.mean_curvature;
    g.pinch_ok = g.norm_sq_a <= h2 + 1e-12 * std::max(1.0, h2);
    return g;
}

} // namespace qkf::shape
