#pragma once

#include "steklov/estimator.hpp"
#include "steklov/mesh.hpp"

#include <span>
#include <vector>

namespace steklov {

struct MarkSet
{
    std::vector<std::size_t> cells;  ///< ascending
    double threshold = 0.0;          ///< on eta_E (not squared)
};

/// Cells with eta_E >= fraction * max eta_E. An all-zero input yields an empty set.
MarkSet mark(std::span<const double> eta, double fraction = 0.5);
MarkSet mark(std::span<const ElementIndicator> indicators, double fraction = 0.5);

struct RefinementRecord
{
    std::vector<std::vector<std::size_t>> children;  ///< per parent cell, its cells in the new mesh
    std::vector<std::size_t> new_vertices;
    std::vector<std::size_t> hanging_cells;          ///< unrefined cells that gained vertices (new ids)
};

struct Refinement
{
    PolygonalMesh mesh;
    RefinementRecord record;
};

/// Splits every marked n-gon into n quadrilaterals (centroid, edge midpoint, vertex,
/// next edge midpoint). Unmarked neighbours receive the midpoints as hanging vertices.
Refinement refine_vem(const PolygonalMesh& mesh, std::span<const std::size_t> marked);

/// Newest-vertex bisection with conforming closure. The first vertex of each
/// triangle is its newest vertex; the opposite edge is the refinement edge.
PolygonalMesh refine_fem(const PolygonalMesh& mesh, std::span<const std::size_t> marked);

/// Rotates each triangle so that its longest edge is the refinement edge.
PolygonalMesh orient_longest_edge(const PolygonalMesh& mesh);

/// Red refinement: each triangle into four similar triangles.
PolygonalMesh refine_uniform(const PolygonalMesh& mesh);

}  // namespace steklov
