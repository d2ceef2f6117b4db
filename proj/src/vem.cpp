#include "steklov/vem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace steklov {

AffineField LocalProjector::project(const Eigen::Ref<const Eigen::VectorXd>& dofs) const
{
    return AffineField{center, diameter, coefficients * dofs};
}

LocalProjector local_projector(std::span<const Point2> polygon)
{
    const auto n = static_cast<Eigen::Index>(polygon.size());
    if (n < 3) throw MeshError("local_projector: polygon needs at least 3 vertices");

    LocalProjector proj;
    proj.area = signed_area(polygon);
    proj.center = centroid(polygon);
    proj.diameter = diameter(polygon);
    const double h = proj.diameter;
    if (!(proj.area > 1e-14 * h * h)) throw MeshError("local_projector: degenerate polygon");

    proj.vertex_values.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        proj.vertex_values(i, 0) = 1.0;
        proj.vertex_values(i, 1) = (polygon[i].x - proj.center.x) / h;
        proj.vertex_values(i, 2) = (polygon[i].y - proj.center.y) / h;
    }

    // Right-hand side: row 0 is the vertex average, rows 1-2 the boundary integrals
    // of phi_i * grad(m) . n, exact for the piecewise-linear traces of the basis.
    Eigen::Matrix<double, 3, Eigen::Dynamic> rhs(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point2 prev = polygon[(i + n - 1) % n];
        const Point2 curr = polygon[i];
        const Point2 next = polygon[(i + 1) % n];
        // Length-scaled outward normals of edges (prev, curr) and (curr, next).
        const double nx = (curr.y - prev.y) + (next.y - curr.y);
        const double ny = -(curr.x - prev.x) - (next.x - curr.x);
        rhs(0, i) = 1.0 / static_cast<double>(n);
        rhs(1, i) = 0.5 * nx / h;
        rhs(2, i) = 0.5 * ny / h;
    }

    const Eigen::Matrix3d g = rhs * proj.vertex_values;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(g);
    if (!lu.isInvertible() || std::abs(g.determinant()) < 1e-14 * std::pow(proj.area / (h * h), 2))
        throw MeshError("local_projector: singular local system");
    proj.coefficients = lu.solve(rhs);
    proj.dof_projector = proj.vertex_values * proj.coefficients;
    return proj;
}

LocalElementOperators local_stiffness(std::span<const Point2> polygon)
{
    LocalElementOperators ops;
    ops.projector = local_projector(polygon);
    const auto& p = ops.projector;
    const auto n = static_cast<Eigen::Index>(polygon.size());

    // Exact P1 stiffness in the scaled monomial basis: |E| grad(m_a).grad(m_b) = |E|/h^2 on the linear part.
    const double g = p.area / (p.diameter * p.diameter);
    const Eigen::Matrix<double, 2, Eigen::Dynamic> grad = p.coefficients.bottomRows<2>();
    Eigen::MatrixXd kc = g * (grad.transpose() * grad);
    ops.consistency = 0.5 * (kc + kc.transpose());

    const Eigen::MatrixXd defect = Eigen::MatrixXd::Identity(n, n) - p.dof_projector;
    Eigen::MatrixXd s = defect.transpose() * defect;
    ops.stabilization = 0.5 * (s + s.transpose());
    ops.stiffness = ops.consistency + ops.stabilization;
    return ops;
}

Eigen::Matrix2d local_boundary_mass(double length)
{
    if (!(length > 0.0)) throw std::invalid_argument("local_boundary_mass: edge length must be positive");
    Eigen::Matrix2d m;
    m << 2.0, 1.0, 1.0, 2.0;
    return (length / 6.0) * m;
}

std::vector<LocalElementOperators> local_operators(const PolygonalMesh& mesh)
{
    std::vector<LocalElementOperators> locals;
    locals.reserve(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        try {
            locals.push_back(local_stiffness(mesh.cell_points(c)));
        } catch (const MeshError& e) {
            throw MeshError("cell " + std::to_string(c) + ": " + e.what());
        }
    }
    return locals;
}

GlobalSystem assemble(const PolygonalMesh& mesh) { return assemble(mesh, local_operators(mesh)); }

GlobalSystem assemble(const PolygonalMesh& mesh, std::span<const LocalElementOperators> locals)
{
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    GlobalSystem sys;
    sys.dofs.num_dofs = mesh.num_vertices();

    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto cell = mesh.cell(c);
        const auto& a = locals[c].stiffness;
        for (std::size_t i = 0; i < cell.size(); ++i)
            for (std::size_t j = 0; j < cell.size(); ++j)
                triplets.emplace_back(static_cast<Eigen::Index>(cell[i]), static_cast<Eigen::Index>(cell[j]),
                                      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    sys.stiffness.resize(n, n);
    sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());

    triplets.clear();
    std::vector<bool> on_gamma0(mesh.num_vertices(), false);
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (edge.tag != BoundaryTag::Gamma0) continue;
        const Eigen::Matrix2d m = local_boundary_mass(mesh.edge_length(e));
        for (int i = 0; i < 2; ++i) {
            on_gamma0[edge.vertices[i]] = true;
            for (int j = 0; j < 2; ++j)
                triplets.emplace_back(static_cast<Eigen::Index>(edge.vertices[i]),
                                      static_cast<Eigen::Index>(edge.vertices[j]), m(i, j));
        }
    }
    sys.boundary_mass.resize(n, n);
    sys.boundary_mass.setFromTriplets(triplets.begin(), triplets.end());
    for (std::size_t v = 0; v < on_gamma0.size(); ++v) {
        if (on_gamma0[v]) sys.dofs.gamma0_dofs.push_back(v);
    }
    return sys;
}

std::vector<AffineField> project_solution(const PolygonalMesh& mesh,
                                          std::span<const LocalElementOperators> locals,
                                          const Eigen::VectorXd& dofs)
{
    std::vector<AffineField> fields;
    fields.reserve(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto cell = mesh.cell(c);
        Eigen::VectorXd local(static_cast<Eigen::Index>(cell.size()));
        for (std::size_t i = 0; i < cell.size(); ++i) local[static_cast<Eigen::Index>(i)] = dofs[static_cast<Eigen::Index>(cell[i])];
        fields.push_back(locals[c].projector.project(local));
    }
    return fields;
}

void write_coordinate(const SparseMatrix& matrix, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file " + path.string());
    char line[96];
    for (Eigen::Index k = 0; k < matrix.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
            std::snprintf(line, sizeof line, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                          static_cast<long>(it.col()), it.value());
            out << line;
        }
    }
}

}  // namespace steklov
