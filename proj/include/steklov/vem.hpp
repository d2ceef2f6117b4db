#pragma once

#include "steklov/mesh.hpp"

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace steklov {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Affine field c0 + c1 (x - xE)/hE + c2 (y - yE)/hE in the scaled monomial basis of a cell.
struct AffineField
{
    Point2 center;
    double scale = 1.0;
    Eigen::Vector3d coefficients = Eigen::Vector3d::Zero();

    double operator()(Point2 p) const
    {
        return coefficients[0] + coefficients[1] * (p.x - center.x) / scale +
               coefficients[2] * (p.y - center.y) / scale;
    }
    Eigen::Vector2d gradient() const { return Eigen::Vector2d(coefficients[1], coefficients[2]) / scale; }
};

/// Projector of the lowest-order virtual element space of one cell onto P1.
struct LocalProjector
{
    Point2 center;       ///< area centroid
    double diameter = 0.0;
    double area = 0.0;
    /// 3 x N: maps vertex dofs to scaled-monomial coefficients of the projection.
    Eigen::Matrix<double, 3, Eigen::Dynamic> coefficients;
    /// N x 3: values of the scaled monomials at the vertices.
    Eigen::Matrix<double, Eigen::Dynamic, 3> vertex_values;
    /// N x N: vertex dofs of the projection (vertex_values * coefficients).
    Eigen::MatrixXd dof_projector;

    AffineField project(const Eigen::Ref<const Eigen::VectorXd>& dofs) const;
};

struct LocalElementOperators
{
    LocalProjector projector;
    Eigen::MatrixXd consistency;    ///< exact P1 stiffness pulled back through the projector
    Eigen::MatrixXd stabilization;  ///< (I - P)^T (I - P), P the dof projector
    Eigen::MatrixXd stiffness;      ///< consistency + stabilization
};

/// Throws MeshError when the local system is singular.
LocalProjector local_projector(std::span<const Point2> polygon);
LocalElementOperators local_stiffness(std::span<const Point2> polygon);

/// Exact mass of linear traces on one edge of the given length.
Eigen::Matrix2d local_boundary_mass(double length);

struct DofMap
{
    std::size_t num_dofs = 0;                 ///< one per vertex
    std::vector<std::size_t> gamma0_dofs;     ///< ascending
};

struct GlobalSystem
{
    SparseMatrix stiffness;      ///< K, from a_h
    SparseMatrix boundary_mass;  ///< M, from b on gamma0
    DofMap dofs;
};

std::vector<LocalElementOperators> local_operators(const PolygonalMesh& mesh);

GlobalSystem assemble(const PolygonalMesh& mesh);
GlobalSystem assemble(const PolygonalMesh& mesh, std::span<const LocalElementOperators> locals);

/// Per-cell projection of a global dof vector.
std::vector<AffineField> project_solution(const PolygonalMesh& mesh,
                                          std::span<const LocalElementOperators> locals,
                                          const Eigen::VectorXd& dofs);

/// Writes "i j value" triplets (0-based), one per line.
void write_coordinate(const SparseMatrix& matrix, const std::filesystem::path& path);

}  // namespace steklov
