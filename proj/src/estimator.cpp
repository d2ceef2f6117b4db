#include "steklov/estimator.hpp"

#include "steklov/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace steklov {

double squared_norm(const EdgeResidual& residual, double length)
{
    const auto& rule = quadrature::gauss2;
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double s = rule.nodes[q];
        const double j = (1.0 - s) * residual.start + s * residual.end;
        sum += rule.weights[q] * j * j;
    }
    return length * sum;
}

std::vector<EdgeResidual> edge_residuals(const PolygonalMesh& mesh,
                                         std::span<const AffineField> projected,
                                         double lambda_h,
                                         const Eigen::VectorXd& w)
{
    if (projected.size() != mesh.num_cells())
        throw std::invalid_argument("edge_residuals: one projected field per cell required");

    auto flux = [&](std::size_t e, std::size_t cell) {
        const auto n = mesh.outward_normal(e, cell);
        const Eigen::Vector2d g = projected[cell].gradient();
        return g[0] * n[0] + g[1] * n[1];
    };

    std::vector<EdgeResidual> out;
    out.reserve(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (edge.left >= mesh.num_cells() || (edge.right && *edge.right >= mesh.num_cells()))
            throw MeshError("edge " + std::to_string(e) + " has corrupt adjacency");
        EdgeResidual r{e, edge.tag, 0.0, 0.0};
        switch (edge.tag) {
        case BoundaryTag::Interior: {
            if (!edge.right) throw MeshError("interior edge " + std::to_string(e) + " has no second cell");
            const double jump = 0.5 * (flux(e, edge.left) + flux(e, *edge.right));
            r.start = r.end = jump;
            break;
        }
        case BoundaryTag::Gamma0: {
            const double f = flux(e, edge.left);
            r.start = lambda_h * w[static_cast<Eigen::Index>(edge.vertices[0])] - f;
            r.end = lambda_h * w[static_cast<Eigen::Index>(edge.vertices[1])] - f;
            break;
        }
        case BoundaryTag::Gamma1:
            r.start = r.end = -flux(e, edge.left);
            break;
        }
        out.push_back(r);
    }
    return out;
}

std::vector<ElementIndicator> element_indicators(const PolygonalMesh& mesh,
                                                 std::span<const LocalElementOperators> locals,
                                                 const SpectralPair& pair)
{
    if (!pair.normalized) throw std::invalid_argument("element_indicators: spectral pair must be normalized");
    if (locals.size() != mesh.num_cells())
        throw std::invalid_argument("element_indicators: one local operator set per cell required");

    const auto projected = project_solution(mesh, locals, pair.w);
    const auto residuals = edge_residuals(mesh, projected, pair.lambda, pair.w);

    // Each edge norm is evaluated once; interior edges feed both neighbours.
    std::vector<double> edge_norm2(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) edge_norm2[e] = squared_norm(residuals[e], mesh.edge_length(e));

    std::vector<ElementIndicator> indicators(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto cell = mesh.cell(c);
        const auto& proj = locals[c].projector;
        Eigen::VectorXd local(static_cast<Eigen::Index>(cell.size()));
        for (std::size_t i = 0; i < cell.size(); ++i)
            local[static_cast<Eigen::Index>(i)] = pair.w[static_cast<Eigen::Index>(cell[i])];

        ElementIndicator& ind = indicators[c];
        const Eigen::VectorXd defect = local - proj.dof_projector * local;
        ind.theta2 = defect.squaredNorm();
        ind.r2 = 0.0;
        for (auto e : mesh.cell_edges(c)) ind.jump2 += proj.diameter * edge_norm2[e];
        ind.eta2 = ind.theta2 + ind.r2 + ind.jump2;
    }
    return indicators;
}

GlobalEstimate global_estimate(std::span<const ElementIndicator> indicators,
                               std::optional<double> reference_lambda,
                               std::optional<double> lambda_h)
{
    GlobalEstimate g;
    for (const auto& ind : indicators) {
        g.theta2 += ind.theta2;
        g.r2 += ind.r2;
        g.jump2 += ind.jump2;
        g.eta2 += ind.eta2;
    }
    if (reference_lambda && lambda_h && g.eta2 > 0.0) g.effectivity = std::abs(*reference_lambda - *lambda_h) / g.eta2;
    return g;
}

void write_indicators_csv(std::span<const ElementIndicator> indicators, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write indicator file " + path.string());
    out << "cell,theta2,jump2,eta2\n";
    char line[128];
    for (std::size_t c = 0; c < indicators.size(); ++c) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", c, indicators[c].theta2, indicators[c].jump2,
                      indicators[c].eta2);
        out << line;
    }
}

}  // namespace steklov
