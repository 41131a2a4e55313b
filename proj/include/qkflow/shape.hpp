#pragma once

#include <Eigen/Dense>
#include <optional>

#include "qkflow/core.hpp"
#include "qkflow/symfunc.hpp"

namespace qkf::shape {

/// First and second derivatives of a graph function at one point.
struct JetPoint {
    Eigen::VectorXd grad; // Du (dimensionless slope)
    Eigen::MatrixXd hess; // D^2 u (1/length), symmetric
};

/// Symmetrized Weingarten matrix of a graph together with the gradient
/// factor. Its eigenvalues are the principal curvatures.
struct ShapeMatrix {
    Eigen::MatrixXd a;
    double w = 1.0;           // sqrt(1 + |Du|^2) >= 1
    double nu_vertical = 1.0; // vertical component of the upward unit normal, 1/w
};

/// Assemble the shape matrix
///   A = ( H - (g q^T + q g^T)/(w(1+w)) + (g.q) g g^T/(w(1+w))^2 ) / w,
/// with g = Du, H = D^2 u, q = H g. The upward-normal orientation makes
/// convex graphs (e.g. u = |x|^2/2) have positive curvatures.
ShapeMatrix weingarten(const JetPoint& jet);

/// Principal curvatures: eigenvalues of the shape matrix, descending.
CurvatureVector principal_curvatures(const ShapeMatrix& s);

/// Scalar invariants at one point, with the quotient gated on admissibility.
struct PointGeometry {
    double mean_curvature = 0.0;  // H = trace of the shape matrix
    double norm_sq_a = 0.0;       // sum of squared principal curvatures
    std::optional<double> qk;     // absent when the quotient is undefined
    symfunc::ConeClass cone;
    bool pinch_ok = false;        // norm_sq_a <= H^2 (up to tolerance)
};

PointGeometry pointwise_geometry(const ShapeMatrix& s, int k);

} // namespace qkf::shape
