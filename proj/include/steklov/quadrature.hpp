#pragma once

#include "steklov/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace steklov::quadrature {

/// Rule on the unit interval; nodes are parameters s in [0, 1], weights sum to 1.
struct EdgeRule
{
    std::array<double, 2> nodes;
    std::array<double, 2> weights;
    int degree;
};

/// Rule on a triangle in barycentric coordinates; weights sum to 1.
struct TriangleRule
{
    std::array<std::array<double, 3>, 3> nodes;
    std::array<double, 3> weights;
    int degree;
};

/// Two-point Gauss-Legendre, exact for cubics.
inline constexpr EdgeRule gauss2{{0.5 - 0.28867513459481288225, 0.5 + 0.28867513459481288225}, {0.5, 0.5}, 3};

/// Three interior points, exact for quadratics.
inline constexpr TriangleRule strang_fix3{{{{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                                            {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                                            {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}}},
                                          {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                                          2};

/// Integral over the segment a -> b of f(s), s the affine parameter in [0, 1].
template <typename F>
double edge_integrate(const EdgeRule& rule, Point2 a, Point2 b, F&& f)
{
    const double length = std::hypot(b.x - a.x, b.y - a.y);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) sum += rule.weights[q] * f(rule.nodes[q]);
    return length * sum;
}

template <typename F>
double triangle_integrate(const TriangleRule& rule, const std::array<Point2, 3>& t, F&& f)
{
    const double area =
        0.5 * std::abs((t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y));
    const double scale = std::max({std::abs(t[1].x - t[0].x), std::abs(t[1].y - t[0].y),
                                   std::abs(t[2].x - t[0].x), std::abs(t[2].y - t[0].y)});
    if (!(area > 1e-14 * scale * scale)) throw std::invalid_argument("triangle_integrate: degenerate triangle");
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const auto& l = rule.nodes[q];
        const Point2 p{l[0] * t[0].x + l[1] * t[1].x + l[2] * t[2].x, l[0] * t[0].y + l[1] * t[1].y + l[2] * t[2].y};
        sum += rule.weights[q] * f(p);
    }
    return area * sum;
}

}  // namespace steklov::quadrature
