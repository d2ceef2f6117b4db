#include "steklov/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace steklov {

namespace {

void require_triangles(const PolygonalMesh& mesh, const char* who)
{
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        if (mesh.cell(c).size() != 3)
            throw MeshError(std::string(who) + ": cell " + std::to_string(c) + " is not a triangle");
    }
}

std::vector<bool> marked_flags(const PolygonalMesh& mesh, std::span<const std::size_t> marked)
{
    std::vector<bool> flags(mesh.num_cells(), false);
    for (auto c : marked) {
        if (c >= mesh.num_cells()) throw std::out_of_range("marked cell " + std::to_string(c) + " does not exist");
        flags[c] = true;
    }
    return flags;
}

/// Boundary tags for the refined mesh: split boundary edges pass their tag to both halves.
std::vector<TaggedEdge> split_boundary_tags(const PolygonalMesh& mesh,
                                            const std::vector<std::optional<std::size_t>>& edge_midpoint)
{
    std::vector<TaggedEdge> tags;
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (!edge.is_boundary()) continue;
        if (const auto m = edge_midpoint[e]) {
            tags.push_back({{edge.vertices[0], *m}, edge.tag});
            tags.push_back({{*m, edge.vertices[1]}, edge.tag});
        } else {
            tags.push_back({edge.vertices, edge.tag});
        }
    }
    return tags;
}

}  // namespace

MarkSet mark(std::span<const double> eta, double fraction)
{
    if (eta.empty()) throw std::invalid_argument("mark: no indicators");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("mark: fraction must lie in (0, 1]");
    MarkSet set;
    const double max_eta = *std::max_element(eta.begin(), eta.end());
    if (!(max_eta > 0.0)) return set;
    set.threshold = fraction * max_eta;
    for (std::size_t c = 0; c < eta.size(); ++c) {
        if (eta[c] >= set.threshold) set.cells.push_back(c);
    }
    return set;
}

MarkSet mark(std::span<const ElementIndicator> indicators, double fraction)
{
    std::vector<double> eta;
    eta.reserve(indicators.size());
    for (const auto& ind : indicators) eta.push_back(std::sqrt(ind.eta2));
    return mark(eta, fraction);
}

Refinement refine_vem(const PolygonalMesh& mesh, std::span<const std::size_t> marked)
{
    const auto is_marked = marked_flags(mesh, marked);
    std::vector<Point2> vertices = mesh.vertices();
    std::vector<std::optional<std::size_t>> edge_midpoint(mesh.num_edges());
    std::vector<std::size_t> cell_center(mesh.num_cells(), 0);
    RefinementRecord record;

    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        if (!is_marked[c]) continue;
        // Rejects cells that would produce inverted quadrilaterals.
        sub_triangulate(mesh, c);
        for (auto e : mesh.cell_edges(c)) {
            if (edge_midpoint[e]) continue;
            const Edge& edge = mesh.edges()[e];
            edge_midpoint[e] = vertices.size();
            record.new_vertices.push_back(vertices.size());
            vertices.push_back(midpoint(vertices[edge.vertices[0]], vertices[edge.vertices[1]]));
        }
        cell_center[c] = vertices.size();
        record.new_vertices.push_back(vertices.size());
        vertices.push_back(element_centroid(mesh, c));
    }

    std::vector<std::vector<std::size_t>> cells;
    cells.reserve(mesh.num_cells() + 4 * marked.size());
    record.children.resize(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto cell = mesh.cell(c);
        const auto edges = mesh.cell_edges(c);
        const std::size_t n = cell.size();
        if (is_marked[c]) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t next = (i + 1) % n;
                record.children[c].push_back(cells.size());
                cells.push_back({cell_center[c], *edge_midpoint[edges[i]], cell[next], *edge_midpoint[edges[next]]});
            }
        } else {
            std::vector<std::size_t> cycle;
            cycle.reserve(n + 2);
            for (std::size_t i = 0; i < n; ++i) {
                cycle.push_back(cell[i]);
                if (edge_midpoint[edges[i]]) cycle.push_back(*edge_midpoint[edges[i]]);
            }
            if (cycle.size() > n) record.hanging_cells.push_back(cells.size());
            record.children[c].push_back(cells.size());
            cells.push_back(std::move(cycle));
        }
    }

    auto tags = split_boundary_tags(mesh, edge_midpoint);
    return {build_topology(std::move(vertices), std::move(cells), tag_from_list(tags)), std::move(record)};
}

PolygonalMesh refine_fem(const PolygonalMesh& mesh, std::span<const std::size_t> marked)
{
    require_triangles(mesh, "refine_fem");
    const auto is_marked = marked_flags(mesh, marked);

    // Local edge 1 joins local vertices 1 and 2: the refinement edge.
    std::vector<bool> edge_marked(mesh.num_edges(), false);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        if (is_marked[c]) edge_marked[mesh.cell_edges(c)[1]] = true;
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
            const auto edges = mesh.cell_edges(c);
            if (edge_marked[edges[1]]) continue;
            if (edge_marked[edges[0]] || edge_marked[edges[2]]) {
                edge_marked[edges[1]] = true;
                changed = true;
            }
        }
    }

    std::vector<Point2> vertices = mesh.vertices();
    std::vector<std::optional<std::size_t>> edge_midpoint(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        if (!edge_marked[e]) continue;
        const Edge& edge = mesh.edges()[e];
        edge_midpoint[e] = vertices.size();
        vertices.push_back(midpoint(vertices[edge.vertices[0]], vertices[edge.vertices[1]]));
    }

    std::vector<std::vector<std::size_t>> cells;
    cells.reserve(2 * mesh.num_cells());
    // Triangle (a, b, c) with refinement edge bc and midpoint m -> (m, a, b), (m, c, a).
    auto emit_child = [&](std::size_t newest, std::size_t a, std::size_t b, std::optional<std::size_t> mid_ab) {
        if (mid_ab) {
            cells.push_back({*mid_ab, newest, a});
            cells.push_back({*mid_ab, b, newest});
        } else {
            cells.push_back({newest, a, b});
        }
    };
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto t = mesh.cell(c);
        const auto edges = mesh.cell_edges(c);
        if (!edge_marked[edges[1]]) {
            cells.push_back({t[0], t[1], t[2]});
            continue;
        }
        const std::size_t m = *edge_midpoint[edges[1]];
        emit_child(m, t[0], t[1], edge_midpoint[edges[0]]);
        emit_child(m, t[2], t[0], edge_midpoint[edges[2]]);
    }

    auto tags = split_boundary_tags(mesh, edge_midpoint);
    return build_topology(std::move(vertices), std::move(cells), tag_from_list(tags));
}

PolygonalMesh orient_longest_edge(const PolygonalMesh& mesh)
{
    require_triangles(mesh, "orient_longest_edge");
    auto cells = mesh.cells();
    const auto& v = mesh.vertices();
    for (auto& t : cells) {
        std::array<double, 3> opposite{};
        for (std::size_t i = 0; i < 3; ++i) {
            const Point2 a = v[t[(i + 1) % 3]], b = v[t[(i + 2) % 3]];
            opposite[i] = std::hypot(b.x - a.x, b.y - a.y);
        }
        const double longest = *std::max_element(opposite.begin(), opposite.end());
        std::size_t k = 0;
        while (opposite[k] < longest * (1.0 - 1e-12)) ++k;
        std::rotate(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k), t.end());
    }
    return build_topology(mesh.vertices(), std::move(cells), tag_from_list(boundary_edges(mesh)));
}

PolygonalMesh refine_uniform(const PolygonalMesh& mesh)
{
    require_triangles(mesh, "refine_uniform");
    std::vector<Point2> vertices = mesh.vertices();
    std::vector<std::optional<std::size_t>> edge_midpoint(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        edge_midpoint[e] = vertices.size();
        vertices.push_back(midpoint(vertices[edge.vertices[0]], vertices[edge.vertices[1]]));
    }

    std::vector<std::vector<std::size_t>> cells;
    cells.reserve(4 * mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto t = mesh.cell(c);
        const auto edges = mesh.cell_edges(c);
        const std::size_t m01 = *edge_midpoint[edges[0]];
        const std::size_t m12 = *edge_midpoint[edges[1]];
        const std::size_t m20 = *edge_midpoint[edges[2]];
        cells.push_back({t[0], m01, m20});
        cells.push_back({t[1], m12, m01});
        cells.push_back({t[2], m20, m12});
        cells.push_back({m12, m20, m01});
    }

    auto tags = split_boundary_tags(mesh, edge_midpoint);
    return build_topology(std::move(vertices), std::move(cells), tag_from_list(tags));
}

}  // namespace steklov
