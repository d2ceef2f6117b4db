#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles/generators.hpp"
#include "steklov/experiments.hpp"
#include "steklov/mesh.hpp"
#include "steklov/mesh_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace steklov;
using doctest::Approx;

namespace {

std::size_t count_tag(const PolygonalMesh& mesh, BoundaryTag tag)
{
    std::size_t n = 0;
    for (const auto& e : mesh.edges()) n += e.tag == tag;
    return n;
}

BoundaryTagRule all_gamma0()
{
    return [](std::size_t, std::size_t) { return std::optional<BoundaryTag>(BoundaryTag::Gamma0); };
}

std::string error_of(auto&& f)
{
    try {
        f();
    } catch (const MeshError& e) {
        return e.what();
    }
    return {};
}

bool point_in_polygon(Point2 p, const std::vector<Point2>& poly)
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
    return inside;
}

bool point_in_triangle(Point2 p, const Triangle& t)
{
    auto side = [](Point2 a, Point2 b, Point2 q) { return (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x); };
    const double d0 = side(t.points[0], t.points[1], p);
    const double d1 = side(t.points[1], t.points[2], p);
    const double d2 = side(t.points[2], t.points[0], p);
    return d0 >= 0 && d1 >= 0 && d2 >= 0;
}

// Triangle (0,0),(1,0),(0,1) after two of its edges gained midpoints.
PolygonalMesh split_triangle_pentagon()
{
    std::vector<Point2> v{{0, 0}, {0.5, 0}, {1, 0}, {0.5, 0.5}, {0, 1}};
    return build_topology(v, {{0, 1, 2, 3, 4}}, tag_by_geometry(v, [](Point2 a, Point2 b) {
                              return std::optional(a.y == 0 && b.y == 0 ? BoundaryTag::Gamma0 : BoundaryTag::Gamma1);
                          }));
}

}  // namespace

TEST_CASE("build_topology counts edges and tags")
{
    SUBCASE("unit square as one cell")
    {
        const auto mesh = oracle::unit_square_cell();
        CHECK(mesh.num_edges() == 4);
        CHECK(count_tag(mesh, BoundaryTag::Gamma0) == 1);
        CHECK(count_tag(mesh, BoundaryTag::Gamma1) == 3);
    }
    SUBCASE("two triangles sharing a diagonal")
    {
        std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        const auto mesh = build_topology(v, {{0, 1, 2}, {0, 2, 3}}, tag_by_geometry(v, oracle::top_is_gamma0));
        CHECK(mesh.num_edges() == 5);
        CHECK(count_tag(mesh, BoundaryTag::Interior) == 1);
        std::size_t boundary = 0;
        for (const auto& e : mesh.edges()) boundary += e.is_boundary();
        CHECK(boundary == 4);
    }
    SUBCASE("clockwise cell is reversed")
    {
        std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        const auto mesh = build_topology(v, {{0, 3, 2, 1}}, tag_by_geometry(v, oracle::top_is_gamma0));
        CHECK(signed_area(mesh.cell_points(0)) == Approx(1.0));
        CHECK(element_area(mesh, 0) > 0.0);
    }
}

TEST_CASE("interior edges are traversed in opposite directions")
{
    const auto mesh = oracle::structured_triangles(4, 3, 0.25);
    for (const auto& e : mesh.edges()) {
        if (e.is_boundary()) {
            CHECK(e.tag != BoundaryTag::Interior);
            continue;
        }
        const auto left = mesh.cell(e.left);
        const auto right = mesh.cell(*e.right);
        auto follows = [](std::span<const std::size_t> cell, std::size_t a, std::size_t b) {
            for (std::size_t i = 0; i < cell.size(); ++i)
                if (cell[i] == a && cell[(i + 1) % cell.size()] == b) return true;
            return false;
        };
        CHECK(follows(left, e.vertices[0], e.vertices[1]));
        CHECK(follows(right, e.vertices[1], e.vertices[0]));
        const auto nl = mesh.outward_normal(static_cast<std::size_t>(&e - mesh.edges().data()), e.left);
        const auto nr = mesh.outward_normal(static_cast<std::size_t>(&e - mesh.edges().data()), *e.right);
        CHECK(nl[0] == Approx(-nr[0]));
        CHECK(nl[1] == Approx(-nr[1]));
    }
}

TEST_CASE("build_topology rejects invalid input")
{
    std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {2, 0.5}, {-1, 0.5}};

    CHECK(error_of([&] { build_topology(v, {{0, 1, 2}, {0, 2, 3}, {0, 4, 2}, {0, 3, 5}}, all_gamma0()); })
              .find("non-manifold edge (2,0)") != std::string::npos);

    std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const std::string untagged = error_of([&] {
        build_topology(sq, {{0, 1, 2, 3}}, [](std::size_t a, std::size_t b) -> std::optional<BoundaryTag> {
            if (a == 2 && b == 3) return BoundaryTag::Gamma0;
            if (a == 1 && b == 2) return std::nullopt;
            return BoundaryTag::Gamma1;
        });
    });
    CHECK(untagged.find("untagged boundary edge (1,2)") != std::string::npos);

    CHECK(error_of([&] { build_topology(sq, {{0, 1, 2, 3}}, [](auto, auto) { return std::optional(BoundaryTag::Gamma1); }); })
              .find("no gamma0") != std::string::npos);
    CHECK(error_of([&] { build_topology(sq, {{0, 1, 7}}, all_gamma0()); }).find("missing vertex 7") != std::string::npos);
    CHECK(error_of([&] { build_topology(sq, {{0, 1, 1, 2, 3}}, all_gamma0()); }).find("repeats") != std::string::npos);
    CHECK(error_of([&] { build_topology(sq, {{0, 1}}, all_gamma0()); }).find("fewer than 3") != std::string::npos);
    CHECK(error_of([&] { build_topology(v, {{0, 2, 1, 4}}, all_gamma0()); }).find("not a simple polygon") !=
          std::string::npos);
    CHECK(error_of([&] { build_topology(sq, {{0, 1, 2}}, all_gamma0()); }).find("not used") != std::string::npos);
    CHECK(error_of([&] { build_topology({}, {}, all_gamma0()); }).find("no cells") != std::string::npos);

    std::vector<Point2> line{{0, 0}, {1, 0}, {2, 0}};
    CHECK(error_of([&] { build_topology(line, {{0, 1, 2}}, all_gamma0()); }).find("zero area") != std::string::npos);

    std::vector<Point2> nan{{0, 0}, {1, 0}, {0, std::nan("")}};
    CHECK(error_of([&] { build_topology(nan, {{0, 1, 2}}, all_gamma0()); }).find("non-finite") != std::string::npos);

    // Two counter-clockwise triangles on the same side of edge (0,1) overlap.
    std::vector<Point2> ov{{0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}};
    CHECK(error_of([&] { build_topology(ov, {{0, 1, 2}, {0, 1, 3}}, all_gamma0()); }).find("same direction") !=
          std::string::npos);
}

TEST_CASE("element geometry")
{
    std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<Point2> tri{{0, 0}, {1, 0}, {0, 1}};
    CHECK(diameter(sq) == Approx(std::sqrt(2.0)));
    CHECK(diameter(tri) == Approx(std::sqrt(2.0)));
    CHECK(signed_area(tri) == Approx(0.5));
    CHECK(centroid(tri).x == Approx(1.0 / 3.0));
    CHECK(centroid(tri).y == Approx(1.0 / 3.0));
    CHECK(centroid(sq).x == Approx(0.5));
    CHECK(centroid(sq).y == Approx(0.5));
    CHECK(signed_area(sq) == Approx(1.0));

    SUBCASE("pentagon from a split triangle")
    {
        const auto mesh = split_triangle_pentagon();
        const auto pts = mesh.cell_points(0);
        const Point2 c = element_centroid(mesh, 0);
        // Hanging midpoints do not move the area centroid.
        CHECK(c.x == Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(c.y == Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(point_in_polygon(c, pts));
        // The vertex average is pulled toward the midpoints.
        double ax = 0, ay = 0;
        for (auto p : pts) {
            ax += p.x / 5.0;
            ay += p.y / 5.0;
        }
        CHECK(std::hypot(ax - c.x, ay - c.y) > 1e-3);
        CHECK(element_area(mesh, 0) == Approx(0.5));
        CHECK(is_convex(pts));
    }
}

TEST_CASE("sub_triangulate fans cover the cell")
{
    SUBCASE("triangle")
    {
        std::vector<Point2> v{{0, 0}, {1, 0}, {0, 1}};
        const auto mesh = build_topology(v, {{0, 1, 2}}, all_gamma0());
        const auto fan = sub_triangulate(mesh, 0);
        CHECK(fan.size() == 3);
        double sum = 0;
        for (const auto& t : fan) sum += signed_area(t.points);
        CHECK(sum == Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("square")
    {
        const auto mesh = oracle::unit_square_cell();
        const auto fan = sub_triangulate(mesh, 0);
        REQUIRE(fan.size() == 4);
        for (const auto& t : fan) CHECK(signed_area(t.points) == Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("split pentagon, Monte Carlo containment")
    {
        const auto mesh = split_triangle_pentagon();
        const auto pts = mesh.cell_points(0);
        const auto fan = sub_triangulate(mesh, 0);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-0.1, 1.1);
        int mismatches = 0;
        for (int i = 0; i < 20000; ++i) {
            const Point2 p{u(rng), u(rng)};
            bool in_fan = false;
            for (const auto& t : fan) in_fan = in_fan || point_in_triangle(p, t);
            mismatches += in_fan != point_in_polygon(p, pts);
        }
        CHECK(mismatches == 0);
    }
    SUBCASE("cell not star-shaped about its centroid")
    {
        // U shape: the centroid lies in the notch.
        std::vector<Point2> v{{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}};
        const auto mesh = build_topology(v, {{0, 1, 2, 3, 4, 5, 6, 7}}, all_gamma0());
        CHECK_THROWS_AS(sub_triangulate(mesh, 0), MeshError);
    }
}

TEST_CASE("sub_triangulate conserves area on random convex cells")
{
    std::mt19937_64 rng(11);
    for (int k = 0; k < 50; ++k) {
        auto poly = oracle::random_convex_polygon(rng, 3 + k % 8, std::pow(10.0, (k % 7) - 3.0));
        std::vector<std::size_t> cell(poly.size());
        for (std::size_t i = 0; i < cell.size(); ++i) cell[i] = i;
        const auto mesh = build_topology(poly, {cell}, all_gamma0());
        double sum = 0;
        for (const auto& t : sub_triangulate(mesh, 0)) sum += signed_area(t.points);
        CHECK(std::abs(sum - element_area(mesh, 0)) <= 1e-12 * element_area(mesh, 0));
    }
}

TEST_CASE("quality report")
{
    SUBCASE("single square")
    {
        const auto report = quality_report(oracle::unit_square_cell());
        REQUIRE(report.cells.size() == 1);
        CHECK(report.cells[0].star_radius == Approx(0.5));
        CHECK(report.cells[0].diameter == Approx(std::sqrt(2.0)));
        CHECK(report.cells[0].star_ratio == Approx(0.5 / std::sqrt(2.0)));
        CHECK(report.a2_violations == 0);
    }
    SUBCASE("uniform triangle mesh")
    {
        const auto mesh = oracle::structured_triangles(4, 4);
        const auto report = quality_report(mesh, 0.1, 0.3);
        // Distance from the centroid (1/3,1/3) of the unit right triangle to its hypotenuse, over sqrt 2.
        const double ratio = (1.0 / 3.0) / std::sqrt(2.0) / std::sqrt(2.0);
        CHECK(report.gamma == Approx(ratio));
        CHECK(report.gamma_hat == Approx(1.0 / std::sqrt(2.0)));
        CHECK(report.a2_violations == 0);
        CHECK(report.a3_violations == 0);
        for (const auto& q : report.cells) CHECK(q.collinear_vertices == 0);
    }
    SUBCASE("neighbour with a hanging vertex at quarter spacing")
    {
        std::vector<Point2> v{{0, 0}, {0.25, 0}, {1, 0}, {0, 1}};
        const auto mesh = build_topology(v, {{0, 1, 2, 3}}, all_gamma0());
        const auto report = quality_report(mesh, 0.1, 0.3);
        CHECK(report.cells[0].collinear_vertices == 1);
        CHECK(report.cells[0].violates_a3);
        CHECK_FALSE(report.cells[0].violates_a2);
        CHECK(report.cells[0].vertex_ratio == Approx(0.25 / std::sqrt(2.0)));
    }
}

TEST_CASE("initial meshes")
{
    for (auto test : {TestCase::SquareSloshing, TestCase::NotchedSquare}) {
        const auto mesh = initial_mesh(test);
        CHECK(mesh.all_triangles());
        CHECK(find_t_junctions(mesh).empty());
        const double domain = test == TestCase::SquareSloshing ? 1.0 : 1.0 - std::sqrt(3.0) / 36.0;
        CHECK(std::abs(total_area(mesh) - domain) <= 1e-10 * domain);
        for (const auto& e : mesh.edges()) {
            if (e.tag != BoundaryTag::Gamma0) continue;
            CHECK(mesh.vertices()[e.vertices[0]].y == 1.0);
            CHECK(mesh.vertices()[e.vertices[1]].y == 1.0);
        }
    }
    const auto square = initial_mesh(TestCase::SquareSloshing);
    CHECK(square.num_vertices() >= 25);
    CHECK(square.num_vertices() <= 41);

    SUBCASE("notch has a single reentrant corner of 5 pi / 3")
    {
        const auto mesh = initial_mesh(TestCase::NotchedSquare);
        // Sum interior angles per vertex over incident cells; boundary vertices with sum > pi are reentrant.
        std::vector<double> angle(mesh.num_vertices(), 0.0);
        for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
            const auto cell = mesh.cell(c);
            for (std::size_t i = 0; i < 3; ++i) {
                const auto& a = mesh.vertices()[cell[(i + 2) % 3]];
                const auto& b = mesh.vertices()[cell[i]];
                const auto& d = mesh.vertices()[cell[(i + 1) % 3]];
                angle[cell[i]] += std::atan2((d.x - b.x) * (a.y - b.y) - (d.y - b.y) * (a.x - b.x),
                                             (d.x - b.x) * (a.x - b.x) + (d.y - b.y) * (a.y - b.y));
            }
        }
        std::vector<bool> on_boundary(mesh.num_vertices(), false);
        for (const auto& e : mesh.edges())
            if (e.is_boundary()) on_boundary[e.vertices[0]] = on_boundary[e.vertices[1]] = true;
        int reentrant = 0;
        for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
            if (!on_boundary[v] || angle[v] <= std::numbers::pi + 1e-9) continue;
            ++reentrant;
            CHECK(angle[v] == Approx(5.0 * std::numbers::pi / 3.0).epsilon(1e-12));
        }
        CHECK(reentrant == 1);
        CHECK(quality_report(mesh).cells.size() == mesh.num_cells());
    }
}

TEST_CASE("t-junction detection")
{
    std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 1}};
    // Triangle (0,1,2) touches the midpoint 4 only through the quad; the quad lists it.
    const auto ok = build_topology(v, {{0, 1, 2}, {0, 2, 4, 3}}, tag_by_geometry(v, oracle::top_is_gamma0));
    CHECK(find_t_junctions(ok).empty());
    std::vector<Point2> w{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.0, 0.5}};
    // Vertex 4 sits on the diagonal (0,2) of triangle (0,1,2) without being one of its corners.
    const auto bad =
        build_topology(w, {{0, 1, 2}, {0, 4, 5}, {4, 2, 3, 5}}, tag_by_geometry(w, oracle::top_is_gamma0));
    const auto junctions = find_t_junctions(bad);
    REQUIRE(junctions.size() == 1);
    CHECK(junctions[0] == 4);
}

TEST_CASE("mesh JSON round trip and errors")
{
    const auto dir = std::filesystem::temp_directory_path() / "steklov_test_mesh";
    std::filesystem::create_directories(dir);

    SUBCASE("round trip")
    {
        for (const auto& mesh : {oracle::unit_square_cell(), initial_mesh(TestCase::NotchedSquare)}) {
            save_mesh(mesh, dir / "m.json");
            const auto back = load_mesh(dir / "m.json");
            CHECK(same_structure(mesh, back));
            CHECK(mesh_to_json(back) == mesh_to_json(mesh));
        }
    }
    auto load_text = [&](const std::string& text) {
        std::ofstream(dir / "bad.json") << text;
        return error_of([&] { load_mesh(dir / "bad.json"); });
    };
    SUBCASE("three cells on one edge")
    {
        const auto msg = load_text(R"({"vertices": [[0,0],[1,0],[1,1],[0,1],[2,0.5],[-1,0.5]],
            "cells": [[0,1,2],[0,2,3],[0,4,2],[0,3,5]],
            "boundary": []})");
        CHECK(msg.find("non-manifold edge (2,0)") != std::string::npos);
        CHECK(msg.find("bad.json") != std::string::npos);
    }
    SUBCASE("missing boundary tag")
    {
        const auto msg = load_text(R"({"vertices": [[0,0],[1,0],[1,1],[0,1]], "cells": [[0,1,2,3]],
            "boundary": [{"edge": [2,3], "tag": "gamma0"}, {"edge": [0,1], "tag": "gamma1"}, {"edge": [1,2], "tag": "gamma1"}]})");
        CHECK(msg.find("untagged boundary edge (3,0)") != std::string::npos);
    }
    SUBCASE("malformed")
    {
        CHECK(load_text("{\"vertices\": [[0,0],").find("malformed mesh JSON") != std::string::npos);
        CHECK(load_text(R"({"vertices": [[0,0,1]], "cells": []})").find("two coordinates") != std::string::npos);
        CHECK(load_text(R"({"vertices": [[0,0],[1,0],[0,1]], "cells": [[0,1,2]],
            "boundary": [{"edge": [0,1], "tag": "gamma2"}]})")
                  .find("unknown boundary tag") != std::string::npos);
        CHECK(load_text(R"({"vertices": [[0,0],[1,0],[1,1],[0,1]], "cells": [[0,1,2],[0,2,3]],
            "boundary": [{"edge": [0,1], "tag": "gamma0"}, {"edge": [1,2], "tag": "gamma1"},
                         {"edge": [2,3], "tag": "gamma1"}, {"edge": [3,0], "tag": "gamma1"},
                         {"edge": [0,2], "tag": "gamma1"}]})")
                  .find("not a boundary edge") != std::string::npos);
        CHECK(error_of([&] { load_mesh(dir / "does_not_exist.json"); }).find("cannot open") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
