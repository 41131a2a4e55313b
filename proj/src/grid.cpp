#include "qkflow/grid.hpp"

#include <cmath>

namespace qkf::flow {

GraphPatch GraphPatch::line(int nx, double h, double x0, BoundaryKind bc)
{
    GraphPatch p;
    p.dim = 1;
    p.nx = nx;
    p.ny = 1;
    p.h = h;
    p.x0 = x0;
    p.bc = bc;
    p.u.assign(static_cast<std::size_t>(nx), 0.0);
    return p;
}

GraphPatch GraphPatch::box(int nx, int ny, double h, double x0, double y0, BoundaryKind bc)
{
    GraphPatch p;
    p.dim = 2;
    p.nx = nx;
    p.ny = ny;
    p.h = h;
    p.x0 = x0;
    p.y0 = y0;
    p.bc = bc;
    p.u.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0.0);
    return p;
}

void GraphPatch::fill(const std::function<double(double, double)>& f)
{
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            u[static_cast<std::size_t>(idx(i, j))] = f(x(i), y(j));
}

void GraphPatch::refresh_boundary(double t)
{
    if (bc == BoundaryKind::Periodic) return;
    if (!boundary) throw ConfigError("dirichlet patch without a boundary provider");
    if (dim == 1) {
        u[0] = boundary(x(0), 0.0, t);
        u[static_cast<std::size_t>(nx - 1)] = boundary(x(nx - 1), 0.0, t);
        return;
    }
    for (int i = 0; i < nx; ++i) {
        u[static_cast<std::size_t>(idx(i, 0))] = boundary(x(i), y(0), t);
        u[static_cast<std::size_t>(idx(i, ny - 1))] = boundary(x(i), y(ny - 1), t);
    }
    for (int j = 0; j < ny; ++j) {
        u[static_cast<std::size_t>(idx(0, j))] = boundary(x(0), y(j), t);
        u[static_cast<std::size_t>(idx(nx - 1, j))] = boundary(x(nx - 1), y(j), t);
    }
}

void GraphPatch::validate() const
{
    if (dim != 1 && dim != 2) throw ConfigError("patch dimension must be 1 or 2");
    if (dim == 1 && ny != 1) throw ConfigError("1d patch must have ny = 1");
    if (nx < 5 || (dim == 2 && ny < 5))
        throw ConfigError("grids need at least 5 points per axis for the stencils");
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
    if (u.size() != static_cast<std::size_t>(total()))
        throw ConfigError("grid storage does not match the declared size");
    if (bc == BoundaryKind::Dirichlet && !boundary)
        throw ConfigError("dirichlet patch needs a boundary provider");
    for (double v : u)
        if (!std::isfinite(v)) throw ConfigError("grid values must be finite");
}

namespace {

inline int wrap(int i, int n)
{
    if (i < 0) return i + n;
    if (i >= n) return i - n;
    return i;
}

} // namespace

shape::JetPoint jet_at(const GraphPatch& p, int i, int j)
{
    const bool periodic = p.bc == BoundaryKind::Periodic;
    if (!periodic && !p.is_interior(i, j))
        throw DomainError("jets are defined at interior points only");

    const double h = p.h;
    auto at = [&](int ii, int jj) {
        if (periodic) {
            ii = wrap(ii, p.nx);
            jj = p.dim == 2 ? wrap(jj, p.ny) : 0;
        }
        return p.u[static_cast<std::size_t>(p.idx(ii, jj))];
    };

    shape::JetPoint jet;
    if (p.dim == 1) {
        jet.grad.resize(1);
        jet.hess.resize(1, 1);
        jet.grad(0) = (at(i + 1, 0) - at(i - 1, 0)) / (2.0 * h);
        jet.hess(0, 0) = (at(i + 1, 0) - 2.0 * at(i, 0) + at(i - 1, 0)) / (h * h);
        return jet;
    }
    jet.grad.resize(2);
    jet.hess.resize(2, 2);
    jet.grad(0) = (at(i + 1, j) - at(i - 1, j)) / (2.0 * h);
    jet.grad(1) = (at(i, j + 1) - at(i, j - 1)) / (2.0 * h);
    jet.hess(0, 0) = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (h * h);
    jet.hess(1, 1) = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (h * h);
    jet.hess(0, 1) = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) /
                     (4.0 * h * h);
    jet.hess(1, 0) = jet.hess(0, 1);
    return jet;
}

std::vector<double> grad4_at(const GraphPatch& p, int i, int j)
{
    const bool periodic = p.bc == BoundaryKind::Periodic;
    if (!periodic) {
        const bool ok_x = i >= 2 && i <= p.nx - 3;
        const bool ok_y = p.dim == 1 || (j >= 2 && j <= p.ny - 3);
        if (!ok_x || !ok_y)
            throw DomainError("fourth-order gradient needs two layers of margin");
    }
    auto at = [&](int ii, int jj) {
        if (periodic) {
            ii = wrap(ii, p.nx); // offsets are at most 2 and nx >= 5
            jj = p.dim == 2 ? wrap(jj, p.ny) : 0;
        }
        return p.u[static_cast<std::size_t>(p.idx(ii, jj))];
    };
    auto d4 = [&](int di, int dj) {
        return (-at(i + 2 * di, j + 2 * dj) + 8.0 * at(i + di, j + dj) -
                8.0 * at(i - di, j - dj) + at(i - 2 * di, j - 2 * dj)) /
               (12.0 * p.h);
    };
    std::vector<double> g(static_cast<std::size_t>(p.dim));
    g[0] = d4(1, 0);
    if (p.dim == 2) g[1] = d4(0, 1);
    return g;
}

} // namespace qkf::flow
