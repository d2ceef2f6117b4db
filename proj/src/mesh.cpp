#include "steklov/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace steklov {

namespace {

double cross(Point2 o, Point2 a, Point2 b)
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double distance(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

std::uint64_t edge_key(std::size_t a, std::size_t b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

std::string edge_name(std::size_t a, std::size_t b)
{
    std::ostringstream os;
    os << "(" << a << "," << b << ")";
    return os.str();
}

int orientation_sign(Point2 o, Point2 a, Point2 b, double scale2)
{
    const double c = cross(o, a, b);
    if (std::abs(c) <= 1e-14 * scale2) return 0;
    return c > 0 ? 1 : -1;
}

bool on_segment(Point2 p, Point2 a, Point2 b)
{
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2, double scale2)
{
    const int d1 = orientation_sign(q1, q2, p1, scale2);
    const int d2 = orientation_sign(q1, q2, p2, scale2);
    const int d3 = orientation_sign(p1, p2, q1, scale2);
    const int d4 = orientation_sign(p1, p2, q2, scale2);
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (d1 == 0 && on_segment(p1, q1, q2)) return true;
    if (d2 == 0 && on_segment(p2, q1, q2)) return true;
    if (d3 == 0 && on_segment(q1, p1, p2)) return true;
    if (d4 == 0 && on_segment(q2, p1, p2)) return true;
    return false;
}

}  // namespace

std::string to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::Gamma0: return "gamma0";
    case BoundaryTag::Gamma1: return "gamma1";
    }
    return "unknown";
}

double signed_area(std::span<const Point2> polygon)
{
    double twice = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

Point2 centroid(std::span<const Point2> polygon)
{
    // Shoelace decomposition relative to the first vertex keeps cancellation small.
    const Point2 o = polygon[0];
    double area2 = 0.0, cx = 0.0, cy = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double ax = polygon[i].x - o.x, ay = polygon[i].y - o.y;
        const double bx = polygon[(i + 1) % n].x - o.x, by = polygon[(i + 1) % n].y - o.y;
        const double c = ax * by - bx * ay;
        area2 += c;
        cx += (ax + bx) * c;
        cy += (ay + by) * c;
    }
    return {o.x + cx / (3.0 * area2), o.y + cy / (3.0 * area2)};
}

double diameter(std::span<const Point2> polygon)
{
    double h = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i)
        for (std::size_t j = i + 1; j < polygon.size(); ++j) h = std::max(h, distance(polygon[i], polygon[j]));
    return h;
}

bool is_convex(std::span<const Point2> polygon, double rel_tol)
{
    const std::size_t n = polygon.size();
    const double h = diameter(polygon);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = cross(polygon[i], polygon[(i + 1) % n], polygon[(i + 2) % n]);
        if (c < -rel_tol * h * h) return false;
    }
    return true;
}

bool is_simple(std::span<const Point2> polygon)
{
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    const double h = diameter(polygon);
    const double scale2 = h * h;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = polygon[i], b = polygon[(i + 1) % n], c = polygon[(i + 2) % n];
        if (distance(a, b) <= 1e-14 * h) return false;
        // Adjacent edges folding back onto each other.
        const double dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
        if (orientation_sign(a, b, c, scale2) == 0 && dot < 0) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n], scale2))
                return false;
        }
    }
    return true;
}

std::vector<Point2> PolygonalMesh::cell_points(std::size_t c) const
{
    std::vector<Point2> pts;
    pts.reserve(cells_[c].size());
    for (auto v : cells_[c]) pts.push_back(vertices_[v]);
    return pts;
}

std::array<double, 2> PolygonalMesh::outward_normal(std::size_t e, std::size_t cell) const
{
    const Edge& edge = edges_[e];
    const Point2 a = vertices_[edge.vertices[0]];
    const Point2 b = vertices_[edge.vertices[1]];
    const double len = distance(a, b);
    std::array<double, 2> n{(b.y - a.y) / len, -(b.x - a.x) / len};
    if (cell != edge.left) {
        n[0] = -n[0];
        n[1] = -n[1];
    }
    return n;
}

double PolygonalMesh::edge_length(std::size_t e) const
{
    return distance(vertices_[edges_[e].vertices[0]], vertices_[edges_[e].vertices[1]]);
}

bool PolygonalMesh::all_triangles() const
{
    return std::all_of(cells_.begin(), cells_.end(), [](const auto& c) { return c.size() == 3; });
}

PolygonalMesh build_topology(std::vector<Point2> vertices,
                             std::vector<std::vector<std::size_t>> cells,
                             const BoundaryTagRule& rule)
{
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        if (!std::isfinite(vertices[v].x) || !std::isfinite(vertices[v].y))
            throw MeshError("vertex " + std::to_string(v) + " has a non-finite coordinate");
    }
    if (cells.empty()) throw MeshError("mesh has no cells");

    std::vector<bool> referenced(vertices.size(), false);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto& cell = cells[c];
        const std::string name = "cell " + std::to_string(c);
        if (cell.size() < 3) throw MeshError(name + " has fewer than 3 vertices");
        for (auto v : cell) {
            if (v >= vertices.size()) throw MeshError(name + " references missing vertex " + std::to_string(v));
            referenced[v] = true;
        }
        std::vector<std::size_t> sorted = cell;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw MeshError(name + " repeats a vertex");

        std::vector<Point2> pts;
        for (auto v : cell) pts.push_back(vertices[v]);
        const double h = diameter(pts);
        const double area = signed_area(pts);
        if (!(h > 0.0) || std::abs(area) <= 1e-14 * h * h) throw MeshError(name + " has zero area");
        if (area < 0.0) {
            std::reverse(cell.begin(), cell.end());
            std::reverse(pts.begin(), pts.end());
        }
        if (!is_simple(pts)) throw MeshError(name + " is not a simple polygon");
    }
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        if (!referenced[v]) throw MeshError("vertex " + std::to_string(v) + " is not used by any cell");
    }

    PolygonalMesh mesh;
    std::unordered_map<std::uint64_t, std::size_t> lookup;
    lookup.reserve(2 * vertices.size());
    mesh.cell_edges_.resize(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        const std::size_t n = cell.size();
        mesh.cell_edges_[c].reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = cell[i], b = cell[(i + 1) % n];
            auto [it, inserted] = lookup.try_emplace(edge_key(a, b), mesh.edges_.size());
            if (inserted) {
                mesh.edges_.push_back(Edge{{a, b}, c, std::nullopt, BoundaryTag::Interior});
            } else {
                Edge& edge = mesh.edges_[it->second];
                if (edge.right)
                    throw MeshError("non-manifold edge " + edge_name(a, b) + " is shared by more than two cells");
                if (edge.vertices[0] == a)
                    throw MeshError("edge " + edge_name(a, b) + " is traversed in the same direction by cells " +
                                    std::to_string(edge.left) + " and " + std::to_string(c) +
                                    " (inconsistent orientation or overlapping cells)");
                edge.right = c;
            }
            mesh.cell_edges_[c].push_back(it->second);
        }
    }

    bool has_gamma0 = false;
    for (auto& edge : mesh.edges_) {
        if (!edge.is_boundary()) continue;
        const auto tag = rule ? rule(edge.vertices[0], edge.vertices[1]) : std::nullopt;
        if (!tag || *tag == BoundaryTag::Interior)
            throw MeshError("untagged boundary edge " + edge_name(edge.vertices[0], edge.vertices[1]));
        edge.tag = *tag;
        has_gamma0 = has_gamma0 || *tag == BoundaryTag::Gamma0;
    }
    if (!has_gamma0) throw MeshError("mesh has no gamma0 edge");

    mesh.vertices_ = std::move(vertices);
    mesh.cells_ = std::move(cells);
    return mesh;
}

BoundaryTagRule tag_by_geometry(std::vector<Point2> vertices,
                                std::function<std::optional<BoundaryTag>(Point2, Point2)> predicate)
{
    return [vertices = std::move(vertices), predicate = std::move(predicate)](std::size_t a, std::size_t b) {
        return predicate(vertices[a], vertices[b]);
    };
}

BoundaryTagRule tag_from_list(const std::vector<TaggedEdge>& tagged)
{
    std::unordered_map<std::uint64_t, BoundaryTag> map;
    for (const auto& t : tagged) map[edge_key(t.vertices[0], t.vertices[1])] = t.tag;
    return [map = std::move(map)](std::size_t a, std::size_t b) -> std::optional<BoundaryTag> {
        auto it = map.find(edge_key(a, b));
        if (it == map.end()) return std::nullopt;
        return it->second;
    };
}

std::vector<TaggedEdge> boundary_edges(const PolygonalMesh& mesh)
{
    std::vector<TaggedEdge> out;
    for (const auto& e : mesh.edges()) {
        if (e.is_boundary()) out.push_back({e.vertices, e.tag});
    }
    return out;
}

double element_diameter(const PolygonalMesh& mesh, std::size_t cell) { return diameter(mesh.cell_points(cell)); }

double element_area(const PolygonalMesh& mesh, std::size_t cell)
{
    const double a = signed_area(mesh.cell_points(cell));
    if (!(a > 0.0)) throw MeshError("cell " + std::to_string(cell) + " has non-positive area");
    return a;
}

Point2 element_centroid(const PolygonalMesh& mesh, std::size_t cell)
{
    const auto pts = mesh.cell_points(cell);
    if (!(signed_area(pts) > 0.0)) throw MeshError("cell " + std::to_string(cell) + " has non-positive area");
    return centroid(pts);
}

std::vector<Triangle> sub_triangulate(const PolygonalMesh& mesh, std::size_t cell)
{
    const auto pts = mesh.cell_points(cell);
    const Point2 c = centroid(pts);
    const double h = diameter(pts);
    std::vector<Triangle> fan;
    fan.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Triangle t{{c, pts[i], pts[(i + 1) % pts.size()]}};
        if (!(cross(t.points[0], t.points[1], t.points[2]) > 1e-14 * h * h))
            throw MeshError("cell " + std::to_string(cell) +
                            " is not star-shaped with respect to its centroid (mesh quality failure)");
        fan.push_back(t);
    }
    return fan;
}

double total_area(const PolygonalMesh& mesh)
{
    double a = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) a += signed_area(mesh.cell_points(c));
    return a;
}

std::vector<std::size_t> find_t_junctions(const PolygonalMesh& mesh)
{
    const auto& verts = mesh.vertices();
    std::vector<std::size_t> by_x(verts.size());
    std::iota(by_x.begin(), by_x.end(), std::size_t{0});
    std::sort(by_x.begin(), by_x.end(), [&](auto a, auto b) { return verts[a].x < verts[b].x; });

    std::vector<std::size_t> found;
    for (const auto& e : mesh.edges()) {
        const Point2 a = verts[e.vertices[0]], b = verts[e.vertices[1]];
        const double len = distance(a, b);
        const double eps = 1e-12 * len;
        auto lo = std::lower_bound(by_x.begin(), by_x.end(), std::min(a.x, b.x) - eps,
                                   [&](std::size_t v, double x) { return verts[v].x < x; });
        for (auto it = lo; it != by_x.end() && verts[*it].x <= std::max(a.x, b.x) + eps; ++it) {
            const std::size_t v = *it;
            if (v == e.vertices[0] || v == e.vertices[1]) continue;
            const Point2 p = verts[v];
            if (std::abs(cross(a, b, p)) > 1e-12 * len * len) continue;
            const double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / (len * len);
            if (t > 1e-12 && t < 1.0 - 1e-12) found.push_back(v);
        }
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    return found;
}

MeshQualityReport quality_report(const PolygonalMesh& mesh, double gamma, double gamma_hat)
{
    MeshQualityReport report;
    report.gamma = std::numeric_limits<double>::infinity();
    report.gamma_hat = std::numeric_limits<double>::infinity();
    report.cells.reserve(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        const std::size_t n = pts.size();
        CellQuality q;
        q.diameter = diameter(pts);
        q.area = signed_area(pts);
        const Point2 ctr = centroid(pts);

        double radius = std::numeric_limits<double>::infinity();
        double min_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 a = pts[i], b = pts[(i + 1) % n];
            radius = std::min(radius, cross(a, b, ctr) / distance(a, b));
            for (std::size_t j = i + 1; j < n; ++j) min_dist = std::min(min_dist, distance(pts[i], pts[j]));
            const Point2 prev = pts[(i + n - 1) % n];
            if (std::abs(cross(prev, a, b)) * 0.5 < 1e-12 * q.diameter * q.diameter) ++q.collinear_vertices;
        }
        q.star_radius = std::max(radius, 0.0);
        q.min_vertex_distance = min_dist;
        q.star_ratio = q.star_radius / q.diameter;
        q.vertex_ratio = q.min_vertex_distance / q.diameter;
        q.violates_a2 = q.star_ratio < gamma;
        q.violates_a3 = q.vertex_ratio < gamma_hat;
        report.a2_violations += q.violates_a2;
        report.a3_violations += q.violates_a3;
        report.gamma = std::min(report.gamma, q.star_ratio);
        report.gamma_hat = std::min(report.gamma_hat, q.vertex_ratio);
        report.cells.push_back(q);
    }
    return report;
}

}  // namespace steklov
