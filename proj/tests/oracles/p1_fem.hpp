#pragma once

// Classical linear finite elements on triangles, written from the textbook
// formulas. Shares only the mesh topology with the library; all geometry is
// recomputed here.

#include "steklov/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

struct P1Triangle
{
    double area = 0.0;
    // Hat-function gradients: grad phi_i = (b_i, c_i) / (2 area).
    std::array<double, 3> b{};
    std::array<double, 3> c{};
};

inline P1Triangle p1_triangle(const steklov::Point2& p0, const steklov::Point2& p1, const steklov::Point2& p2)
{
    const std::array<steklov::Point2, 3> p{p0, p1, p2};
    P1Triangle t;
    t.area = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    if (t.area <= 0.0) throw std::invalid_argument("p1_triangle: clockwise or degenerate triangle");
    for (int i = 0; i < 3; ++i) {
        const auto& pj = p[(i + 1) % 3];
        const auto& pk = p[(i + 2) % 3];
        t.b[i] = pj.y - pk.y;
        t.c[i] = pk.x - pj.x;
    }
    return t;
}

/// K_ij = (b_i b_j + c_i c_j) / (4 area), assembled densely.
inline Eigen::MatrixXd p1_stiffness(const steklov::PolygonalMesh& mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (const auto& cell : mesh.cells()) {
        if (cell.size() != 3) throw std::invalid_argument("p1_stiffness: triangles only");
        const auto& v = mesh.vertices();
        const auto t = p1_triangle(v[cell[0]], v[cell[1]], v[cell[2]]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                k(static_cast<Eigen::Index>(cell[i]), static_cast<Eigen::Index>(cell[j])) +=
                    (t.b[i] * t.b[j] + t.c[i] * t.c[j]) / (4.0 * t.area);
    }
    return k;
}

/// Gradient of the piecewise linear interpolant of `u` on a triangle.
inline Eigen::Vector2d p1_gradient(const steklov::PolygonalMesh& mesh, std::size_t cell, const Eigen::VectorXd& u)
{
    const auto& ids = mesh.cells()[cell];
    const auto& v = mesh.vertices();
    const auto t = p1_triangle(v[ids[0]], v[ids[1]], v[ids[2]]);
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) {
        const double ui = u[static_cast<Eigen::Index>(ids[i])];
        g[0] += ui * t.b[i];
        g[1] += ui * t.c[i];
    }
    return g / (2.0 * t.area);
}

/// Classical residual estimator for the linear FEM Steklov problem:
///   eta_T^2 = h_T * sum over edges of T of ||J_e||^2,
/// with J the half normal-flux jump inside, lambda u - du/dn on gamma0 and
/// -du/dn on gamma1. h_T is the longest edge. The affine gamma0 residual is
/// integrated in closed form: int_0^1 (a + (b - a) s)^2 ds = (a^2 + a b + b^2) / 3.
inline std::vector<double> p1_edge_estimator(const steklov::PolygonalMesh& mesh, double lambda,
                                             const Eigen::VectorXd& u)
{
    const auto& v = mesh.vertices();
    std::vector<Eigen::Vector2d> grad(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) grad[c] = p1_gradient(mesh, c, u);

    // Outward normal of (a -> b) for a counter-clockwise cell.
    auto outward = [&](std::size_t a, std::size_t b) {
        const double dx = v[b].x - v[a].x, dy = v[b].y - v[a].y;
        const double len = std::hypot(dx, dy);
        return Eigen::Vector2d(dy / len, -dx / len);
    };

    std::vector<double> edge_term(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const auto& edge = mesh.edges()[e];
        const auto [a, b] = edge.vertices;
        const double len = std::hypot(v[b].x - v[a].x, v[b].y - v[a].y);
        const Eigen::Vector2d n = outward(a, b);
        const double flux = grad[edge.left].dot(n);
        switch (edge.tag) {
        case steklov::BoundaryTag::Interior: {
            const double jump = 0.5 * (flux - grad[*edge.right].dot(n));
            edge_term[e] = len * jump * jump;
            break;
        }
        case steklov::BoundaryTag::Gamma0: {
            const double ra = lambda * u[static_cast<Eigen::Index>(a)] - flux;
            const double rb = lambda * u[static_cast<Eigen::Index>(b)] - flux;
            edge_term[e] = len * (ra * ra + ra * rb + rb * rb) / 3.0;
            break;
        }
        case steklov::BoundaryTag::Gamma1:
            edge_term[e] = len * flux * flux;
            break;
        }
    }

    std::vector<double> eta2(mesh.num_cells(), 0.0);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto& ids = mesh.cells()[c];
        double h = 0.0;
        for (int i = 0; i < 3; ++i) {
            const auto& p = v[ids[i]];
            const auto& q = v[ids[(i + 1) % 3]];
            h = std::max(h, std::hypot(q.x - p.x, q.y - p.y));
        }
        for (auto e : mesh.cell_edges(c)) eta2[c] += h * edge_term[e];
    }
    return eta2;
}

}  // namespace oracle
