#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace steklov {

struct Point2
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

enum class BoundaryTag
{
    Interior,
    Gamma0,
    Gamma1
};

std::string to_string(BoundaryTag tag);

class MeshError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// An edge of the mesh. `vertices` follow the traversal direction of `left`,
/// so the outward normal of `left` points to the right of v0 -> v1.
struct Edge
{
    std::array<std::size_t, 2> vertices{};
    std::size_t left = 0;
    std::optional<std::size_t> right;
    BoundaryTag tag = BoundaryTag::Interior;

    bool is_boundary() const { return !right.has_value(); }
};

/// Called once per boundary edge (v0, v1 in counter-clockwise traversal order).
/// Returning nullopt leaves the edge untagged, which build_topology rejects.
using BoundaryTagRule = std::function<std::optional<BoundaryTag>(std::size_t v0, std::size_t v1)>;

/// Conforming polygonal mesh. Cells are counter-clockwise vertex cycles; hanging
/// nodes are ordinary (possibly collinear) polygon vertices. Instances are only
/// produced by build_topology and are immutable afterwards.
class PolygonalMesh
{
public:
    PolygonalMesh() = default;

    const std::vector<Point2>& vertices() const { return vertices_; }
    const std::vector<std::vector<std::size_t>>& cells() const { return cells_; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    std::span<const std::size_t> cell(std::size_t c) const { return cells_[c]; }
    /// Edge ids of cell c; entry i joins local vertices i and i+1.
    std::span<const std::size_t> cell_edges(std::size_t c) const { return cell_edges_[c]; }
    std::vector<Point2> cell_points(std::size_t c) const;

    /// Outward unit normal of edge e as seen from `cell` (one of its incident cells).
    std::array<double, 2> outward_normal(std::size_t e, std::size_t cell) const;
    double edge_length(std::size_t e) const;

    bool all_triangles() const;

    friend PolygonalMesh build_topology(std::vector<Point2> vertices,
                                        std::vector<std::vector<std::size_t>> cells,
                                        const BoundaryTagRule& rule);

private:
    std::vector<Point2> vertices_;
    std::vector<std::vector<std::size_t>> cells_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> cell_edges_;
};

/// Builds the edge table, repairs clockwise cells and validates every mesh invariant.
/// Throws MeshError naming the offending cell or edge.
PolygonalMesh build_topology(std::vector<Point2> vertices,
                             std::vector<std::vector<std::size_t>> cells,
                             const BoundaryTagRule& rule);

/// Rule from a geometric predicate on the edge endpoints.
BoundaryTagRule tag_by_geometry(std::vector<Point2> vertices,
                                std::function<std::optional<BoundaryTag>(Point2, Point2)> predicate);

/// Rule that keeps the tags of an existing mesh's boundary edges (keyed by unordered vertex pair).
struct TaggedEdge
{
    std::array<std::size_t, 2> vertices{};
    BoundaryTag tag = BoundaryTag::Gamma1;
};
BoundaryTagRule tag_from_list(const std::vector<TaggedEdge>& tagged);

std::vector<TaggedEdge> boundary_edges(const PolygonalMesh& mesh);

// Geometry of a single polygon given by its counter-clockwise points.
double signed_area(std::span<const Point2> polygon);
Point2 centroid(std::span<const Point2> polygon);
double diameter(std::span<const Point2> polygon);
bool is_convex(std::span<const Point2> polygon, double rel_tol = 1e-12);
bool is_simple(std::span<const Point2> polygon);

double element_diameter(const PolygonalMesh& mesh, std::size_t cell);
double element_area(const PolygonalMesh& mesh, std::size_t cell);
Point2 element_centroid(const PolygonalMesh& mesh, std::size_t cell);

struct Triangle
{
    std::array<Point2, 3> points;
};

/// Fan (centroid, v_i, v_{i+1}). Throws if the cell is not star-shaped w.r.t. its centroid.
std::vector<Triangle> sub_triangulate(const PolygonalMesh& mesh, std::size_t cell);

double total_area(const PolygonalMesh& mesh);

/// Vertices lying on the interior of some edge without being one of its endpoints.
/// Empty for an edge-matching mesh.
std::vector<std::size_t> find_t_junctions(const PolygonalMesh& mesh);

struct CellQuality
{
    double diameter = 0.0;
    double area = 0.0;
    double star_radius = 0.0;     ///< radius of the largest ball centred at the centroid inside the kernel
    double min_vertex_distance = 0.0;
    double star_ratio = 0.0;      ///< star_radius / diameter (A2)
    double vertex_ratio = 0.0;    ///< min_vertex_distance / diameter (A3)
    std::size_t collinear_vertices = 0;
    bool violates_a2 = false;
    bool violates_a3 = false;
};

struct MeshQualityReport
{
    std::vector<CellQuality> cells;
    double gamma = 0.0;        ///< min star_ratio over the mesh
    double gamma_hat = 0.0;    ///< min vertex_ratio over the mesh
    std::size_t a2_violations = 0;
    std::size_t a3_violations = 0;
};

MeshQualityReport quality_report(const PolygonalMesh& mesh, double gamma = 0.1, double gamma_hat = 0.1);

}  // namespace steklov
