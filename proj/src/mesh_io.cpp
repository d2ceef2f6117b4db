#include "steklov/mesh_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace steklov {

using nlohmann::json;

std::string mesh_to_json(const PolygonalMesh& mesh)
{
    json j;
    j["vertices"] = json::array();
    for (const auto& p : mesh.vertices()) j["vertices"].push_back({p.x, p.y});
    j["cells"] = mesh.cells();
    j["boundary"] = json::array();
    for (const auto& e : mesh.edges()) {
        if (!e.is_boundary()) continue;
        j["boundary"].push_back({{"edge", {e.vertices[0], e.vertices[1]}}, {"tag", to_string(e.tag)}});
    }
    return j.dump();
}

PolygonalMesh mesh_from_json(const std::string& text)
{
    std::vector<Point2> vertices;
    std::vector<std::vector<std::size_t>> cells;
    std::vector<TaggedEdge> tagged;
    try {
        const json j = json::parse(text);
        for (const auto& v : j.at("vertices")) {
            if (v.size() != 2) throw MeshError("vertex entry must have exactly two coordinates");
            vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        }
        cells = j.at("cells").get<std::vector<std::vector<std::size_t>>>();
        for (const auto& b : j.value("boundary", json::array())) {
            const auto edge = b.at("edge").get<std::array<std::size_t, 2>>();
            const auto tag = b.at("tag").get<std::string>();
            if (tag == "gamma0")
                tagged.push_back({edge, BoundaryTag::Gamma0});
            else if (tag == "gamma1")
                tagged.push_back({edge, BoundaryTag::Gamma1});
            else
                throw MeshError("unknown boundary tag '" + tag + "'");
        }
    } catch (const json::exception& e) {
        throw MeshError(std::string("malformed mesh JSON: ") + e.what());
    }

    PolygonalMesh mesh = build_topology(std::move(vertices), std::move(cells), tag_from_list(tagged));

    std::set<std::pair<std::size_t, std::size_t>> boundary;
    for (const auto& e : mesh.edges()) {
        if (e.is_boundary()) boundary.emplace(std::minmax(e.vertices[0], e.vertices[1]));
    }
    for (const auto& t : tagged) {
        if (!boundary.count(std::minmax(t.vertices[0], t.vertices[1])))
            throw MeshError("boundary entry (" + std::to_string(t.vertices[0]) + "," + std::to_string(t.vertices[1]) +
                            ") is not a boundary edge of the mesh");
    }
    return mesh;
}

PolygonalMesh load_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return mesh_from_json(buffer.str());
    } catch (const MeshError& e) {
        throw MeshError(path.string() + ": " + e.what());
    }
}

void save_mesh(const PolygonalMesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file " + path.string());
    out << mesh_to_json(mesh) << '\n';
    if (!out) throw MeshError("failed writing mesh file " + path.string());
}

bool same_structure(const PolygonalMesh& a, const PolygonalMesh& b)
{
    if (a.vertices() != b.vertices() || a.cells() != b.cells()) return false;
    if (a.num_edges() != b.num_edges()) return false;
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        const Edge& ea = a.edges()[e];
        const Edge& eb = b.edges()[e];
        if (ea.vertices != eb.vertices || ea.left != eb.left || ea.right != eb.right || ea.tag != eb.tag)
            return false;
    }
    return true;
}

}  // namespace steklov
