#pragma once

#include "steklov/eigensolver.hpp"
#include "steklov/mesh.hpp"
#include "steklov/vem.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace steklov {

/// Edge residual J, affine along the edge: values at edge.vertices[0] and [1].
/// Interior and gamma1 residuals are constant (start == end).
struct EdgeResidual
{
    std::size_t edge = 0;
    BoundaryTag tag = BoundaryTag::Interior;
    double start = 0.0;
    double end = 0.0;
};

/// ||J||^2 over an edge of the given length (2-point Gauss, exact for affine J).
double squared_norm(const EdgeResidual& residual, double length);

struct ElementIndicator
{
    double theta2 = 0.0;  ///< inconsistency S(w - Pi w, w - Pi w)
    double r2 = 0.0;      ///< volume residual; identically zero for k = 1
    double jump2 = 0.0;   ///< sum over the cell's edges of h_E ||J||^2
    double eta2 = 0.0;
};

struct GlobalEstimate
{
    double eta2 = 0.0;
    double theta2 = 0.0;
    double r2 = 0.0;
    double jump2 = 0.0;
    std::optional<double> effectivity;  ///< |lambda_ref - lambda_h| / eta2
};

/// Interior: half the jump of the projected normal flux. Gamma0: lambda_h w_h - flux.
/// Gamma1: minus the flux. Uses only vertex dofs and the per-cell projections.
std::vector<EdgeResidual> edge_residuals(const PolygonalMesh& mesh,
                                         std::span<const AffineField> projected,
                                         double lambda_h,
                                         const Eigen::VectorXd& w);

std::vector<ElementIndicator> element_indicators(const PolygonalMesh& mesh,
                                                 std::span<const LocalElementOperators> locals,
                                                 const SpectralPair& pair);

GlobalEstimate global_estimate(std::span<const ElementIndicator> indicators,
                               std::optional<double> reference_lambda = std::nullopt,
                               std::optional<double> lambda_h = std::nullopt);

/// CSV "cell,theta2,jump2,eta2".
void write_indicators_csv(std::span<const ElementIndicator> indicators, const std::filesystem::path& path);

}  // namespace steklov
