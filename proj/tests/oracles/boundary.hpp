#pragma once

// Boundary-integral evaluation of the lowest-order elliptic projection, with
// its own geometry and quadrature: for q linear, int_E grad v . grad q equals
// int_dE v grad q . n, and the trace of v is linear on every edge.

#include "steklov/mesh.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace oracle {

inline double shoelace(const std::vector<steklov::Point2>& p)
{
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& u = p[i];
        const auto& w = p[(i + 1) % p.size()];
        a += u.x * w.y - w.x * u.y;
    }
    return 0.5 * a;
}

/// int_dE v n ds for the piecewise linear trace with vertex values `v`, by
/// three-point Gauss-Legendre on each edge.
inline Eigen::Vector2d boundary_flux(const std::vector<steklov::Point2>& p, const Eigen::VectorXd& v)
{
    static constexpr double nodes[3] = {0.5 - 0.38729833462074168852, 0.5, 0.5 + 0.38729833462074168852};
    static constexpr double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    const auto n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = (i + 1) % n;
        // Length-scaled outward normal of a counter-clockwise edge.
        const Eigen::Vector2d normal(p[j].y - p[i].y, p[i].x - p[j].x);
        double integral = 0.0;
        for (int q = 0; q < 3; ++q)
            integral += weights[q] * ((1.0 - nodes[q]) * v[static_cast<Eigen::Index>(i)] +
                                      nodes[q] * v[static_cast<Eigen::Index>(j)]);
        sum += integral * normal;
    }
    return sum;
}

/// Gradient of the projection of the virtual function with vertex values `v`.
inline Eigen::Vector2d projected_gradient(const std::vector<steklov::Point2>& p, const Eigen::VectorXd& v)
{
    return boundary_flux(p, v) / shoelace(p);
}

/// Value of the projection at `x`: the gradient above, shifted so that its vertex
/// average matches that of `v`.
inline double projected_value(const std::vector<steklov::Point2>& p, const Eigen::VectorXd& v, steklov::Point2 x)
{
    const Eigen::Vector2d g = projected_gradient(p, v);
    double mean_v = 0.0, mean_lin = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        mean_v += v[static_cast<Eigen::Index>(i)];
        mean_lin += g[0] * p[i].x + g[1] * p[i].y;
    }
    const double c = (mean_v - mean_lin) / static_cast<double>(p.size());
    return c + g[0] * x.x + g[1] * x.y;
}

/// a(p, phi_i) for a linear p with gradient g: int_dE phi_i g . n.
inline Eigen::VectorXd exact_against_basis(const std::vector<steklov::Point2>& p, const Eigen::Vector2d& g)
{
    const auto n = static_cast<Eigen::Index>(p.size());
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[i] = 1.0;
        out[i] = boundary_flux(p, e).dot(g);
    }
    return out;
}

}  // namespace oracle
