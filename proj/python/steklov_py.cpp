#include "steklov/adaptivity.hpp"
#include "steklov/eigensolver.hpp"
#include "steklov/estimator.hpp"
#include "steklov/experiments.hpp"
#include "steklov/mesh.hpp"
#include "steklov/mesh_io.hpp"
#include "steklov/vem.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace steklov;

namespace {

std::vector<Point2> to_points(const Eigen::Ref<const Eigen::MatrixX2d>& xy)
{
    std::vector<Point2> out(static_cast<std::size_t>(xy.rows()));
    for (Eigen::Index i = 0; i < xy.rows(); ++i) out[static_cast<std::size_t>(i)] = {xy(i, 0), xy(i, 1)};
    return out;
}

Eigen::MatrixX2d from_points(const std::vector<Point2>& pts)
{
    Eigen::MatrixX2d out(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) << pts[i].x, pts[i].y;
    return out;
}

py::dict record_dict(const StepRecord& r)
{
    py::dict d;
    d["step"] = r.step;
    d["N"] = r.dofs;
    d["lambda_h"] = r.lambda_h;
    d["error"] = r.error;
    d["theta2"] = r.theta2;
    d["jump2"] = r.jump2;
    d["eta2"] = r.eta2;
    d["effectivity"] = r.effectivity;
    d["wall_time"] = r.wall_time;
    d["higher_lambdas"] = r.higher_lambdas;
    return d;
}

}  // namespace

PYBIND11_MODULE(_steklov, m)
{
    m.doc() = "Lowest-order virtual elements for the Steklov eigenvalue problem";

    py::register_exception<MeshError>(m, "MeshError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::enum_<BoundaryTag>(m, "BoundaryTag")
        .value("Interior", BoundaryTag::Interior)
        .value("Gamma0", BoundaryTag::Gamma0)
        .value("Gamma1", BoundaryTag::Gamma1);

    py::class_<PolygonalMesh>(m, "Mesh")
        .def_property_readonly("vertices", [](const PolygonalMesh& mesh) { return from_points(mesh.vertices()); })
        .def_property_readonly("cells", &PolygonalMesh::cells)
        .def_property_readonly("num_vertices", &PolygonalMesh::num_vertices)
        .def_property_readonly("num_cells", &PolygonalMesh::num_cells)
        .def_property_readonly("num_edges", &PolygonalMesh::num_edges)
        .def("boundary_edges",
             [](const PolygonalMesh& mesh) {
                 std::vector<std::pair<std::array<std::size_t, 2>, BoundaryTag>> out;
                 for (const auto& e : boundary_edges(mesh)) out.emplace_back(e.vertices, e.tag);
                 return out;
             })
        .def("area", [](const PolygonalMesh& mesh) { return total_area(mesh); })
        .def("t_junctions", [](const PolygonalMesh& mesh) { return find_t_junctions(mesh); })
        .def("to_json", [](const PolygonalMesh& mesh) { return mesh_to_json(mesh); })
        .def("__repr__", [](const PolygonalMesh& mesh) {
            return "<Mesh " + std::to_string(mesh.num_vertices()) + " vertices, " + std::to_string(mesh.num_cells()) +
                   " cells>";
        });

    m.def(
        "build_mesh",
        [](const Eigen::Ref<const Eigen::MatrixX2d>& vertices, std::vector<std::vector<std::size_t>> cells,
           double gamma0_y) {
            auto pts = to_points(vertices);
            auto rule = tag_by_geometry(pts, [gamma0_y](Point2 a, Point2 b) -> std::optional<BoundaryTag> {
                const bool top = std::abs(a.y - gamma0_y) < 1e-12 && std::abs(b.y - gamma0_y) < 1e-12;
                return top ? BoundaryTag::Gamma0 : BoundaryTag::Gamma1;
            });
            return build_topology(std::move(pts), std::move(cells), rule);
        },
        py::arg("vertices"), py::arg("cells"), py::arg("gamma0_y") = 1.0,
        "Mesh from an (n, 2) vertex array and vertex cycles; boundary edges on y = gamma0_y form gamma0.");
    m.def("mesh_from_json", &mesh_from_json, py::arg("text"));
    m.def("load_mesh", &load_mesh, py::arg("path"));
    m.def("save_mesh", &save_mesh, py::arg("mesh"), py::arg("path"));
    m.def(
        "initial_mesh", [](const std::string& test) { return initial_mesh(parse_test_case(test)); },
        py::arg("test") = "square");

    m.def(
        "local_stiffness",
        [](const Eigen::Ref<const Eigen::MatrixX2d>& polygon) {
            const auto ops = local_stiffness(to_points(polygon));
            py::dict d;
            d["consistency"] = ops.consistency;
            d["stabilization"] = ops.stabilization;
            d["stiffness"] = ops.stiffness;
            d["projector"] = ops.projector.dof_projector;
            d["area"] = ops.projector.area;
            d["diameter"] = ops.projector.diameter;
            return d;
        },
        py::arg("polygon"), "Local VEM matrices of one counter-clockwise polygon.");

    m.def(
        "assemble",
        [](const PolygonalMesh& mesh) {
            auto sys = assemble(mesh);
            return py::make_tuple(Eigen::MatrixXd(sys.stiffness), Eigen::MatrixXd(sys.boundary_mass),
                                  sys.dofs.gamma0_dofs);
        },
        py::arg("mesh"), "Dense (K, M, gamma0 dofs); intended for small meshes.");

    m.def(
        "solve",
        [](const PolygonalMesh& mesh, std::size_t count, double tol, std::uint64_t seed) {
            SolveOptions opt;
            opt.count = count;
            opt.tol = tol;
            opt.seed = seed;
            const auto pairs = solve_smallest_positive(assemble(mesh), opt);
            std::vector<double> lambdas;
            Eigen::MatrixXd vectors(static_cast<Eigen::Index>(mesh.num_vertices()), static_cast<Eigen::Index>(pairs.size()));
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                lambdas.push_back(pairs[i].lambda);
                vectors.col(static_cast<Eigen::Index>(i)) = pairs[i].w;
            }
            return py::make_tuple(lambdas, vectors);
        },
        py::arg("mesh"), py::arg("count") = 1, py::arg("tol") = 1e-10, py::arg("seed") = 0,
        "Smallest positive eigenvalues and M-normalized eigenvectors (columns).");

    m.def(
        "indicators",
        [](const PolygonalMesh& mesh) {
            const auto locals = local_operators(mesh);
            const auto pair = solve_smallest_positive(assemble(mesh, locals)).front();
            const auto ind = element_indicators(mesh, locals, pair);
            Eigen::MatrixXd out(static_cast<Eigen::Index>(ind.size()), 3);
            for (std::size_t c = 0; c < ind.size(); ++c)
                out.row(static_cast<Eigen::Index>(c)) << ind[c].theta2, ind[c].jump2, ind[c].eta2;
            return py::make_tuple(pair.lambda, out);
        },
        py::arg("mesh"), "(lambda_h, array of theta2, jump2, eta2 per cell) for the first eigenpair.");

    m.def(
        "mark",
        [](const std::vector<double>& eta, double fraction) { return mark(eta, fraction).cells; },
        py::arg("eta"), py::arg("fraction") = 0.5);
    m.def(
        "refine_vem",
        [](const PolygonalMesh& mesh, const std::vector<std::size_t>& marked) { return refine_vem(mesh, marked).mesh; },
        py::arg("mesh"), py::arg("marked"));
    m.def(
        "refine_fem",
        [](const PolygonalMesh& mesh, const std::vector<std::size_t>& marked) { return refine_fem(mesh, marked); },
        py::arg("mesh"), py::arg("marked"));
    m.def("refine_uniform", &refine_uniform, py::arg("mesh"));

    m.def("exact_eigenvalue_square", &exact_eigenvalue_square, py::arg("n") = 1);
    m.def(
        "fit_rate",
        [](const std::vector<double>& dofs, const std::vector<double>& errors, std::size_t last) {
            return fit_rate(dofs, errors, last).slope;
        },
        py::arg("dofs"), py::arg("errors"), py::arg("last") = 5);

    m.def(
        "run_experiment",
        [](const std::string& test, const std::string& method, std::size_t steps, double mark_fraction,
           std::optional<double> reference, std::optional<std::filesystem::path> out) {
            ExperimentConfig cfg;
            cfg.test = parse_test_case(test);
            cfg.method = parse_method(method);
            cfg.steps = steps;
            cfg.mark_fraction = mark_fraction;
            cfg.reference = reference;
            cfg.keep_meshes = out.has_value();
            ExperimentResult result;
            {
                py::gil_scoped_release release;
                result = run_experiment(cfg);
                if (out) emit_outputs(result, *out);
            }
            py::list records;
            for (const auto& r : result.records) records.append(record_dict(r));
            py::dict d;
            d["reference"] = result.reference;
            d["records"] = records;
            return d;
        },
        py::arg("test") = "square", py::arg("method") = "adaptive-vem", py::arg("steps") = 8,
        py::arg("mark_fraction") = 0.5, py::arg("reference") = py::none(), py::arg("out") = py::none(),
        "Run the adaptive loop; with `out` set, results.csv, curves.csv and per-step meshes are written there.");
}
