#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qkflow/core.hpp"
#include "qkflow/shape.hpp"

namespace qkf::flow {

enum class BoundaryKind { Dirichlet, Periodic };

/// Dirichlet boundary values as a function of position and time. For 1d
/// patches the y argument is passed as 0.
using BoundaryFn = std::function<double(double x, double y, double t)>;

/// Uniform-grid sample of a graph function over an interval (dim 1) or a box
/// (dim 2). Row-major storage, index (i,j) -> j*nx + i.
struct GraphPatch {
    int dim = 2;
    int nx = 0;
    int ny = 1;
    double h = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
    BoundaryKind bc = BoundaryKind::Dirichlet;
    BoundaryFn boundary; // required for Dirichlet
    std::vector<double> u;

    static GraphPatch line(int nx, double h, double x0, BoundaryKind bc);
    static GraphPatch box(int nx, int ny, double h, double x0, double y0, BoundaryKind bc);

    std::int64_t idx(int i, int j) const { return static_cast<std::int64_t>(j) * nx + i; }
    double x(int i) const { return x0 + i * h; }
    double y(int j) const { return y0 + j * h; }
    std::int64_t total() const { return static_cast<std::int64_t>(nx) * ny; }

    bool is_interior(int i, int j) const
    {
        if (bc == BoundaryKind::Periodic) return true;
        if (i <= 0 || i >= nx - 1) return false;
        if (dim == 2 && (j <= 0 || j >= ny - 1)) return false;
        return true;
    }

    /// Sample u = f(x, y) everywhere (boundary included).
    void fill(const std::function<double(double, double)>& f);

    /// Rewrite the outermost layer from the boundary provider at time t.
    /// No-op for periodic patches.
    void refresh_boundary(double t);

    /// Stencil-room, spacing and finiteness checks; throws ConfigError.
    void validate() const;
};

/// Second-order central-difference jets at an interior point (grid margin 1).
shape::JetPoint jet_at(const GraphPatch& p, int i, int j);

/// Gradient by fourth-order central differences; needs margin 2 from the
/// boundary on a Dirichlet patch.
std::vector<double> grad4_at(const GraphPatch& p, int i, int j);

} // namespace qkf::flow
