#pragma once

#include "steklov/vem.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace steklov {

class SolverError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct SolveOptions
{
    std::size_t count = 1;              ///< number of positive eigenvalues
    double tol = 1e-10;                 ///< relative residual bound per pair
    std::size_t max_iterations = 500;   ///< operator applications
    std::uint64_t seed = 0;             ///< start-vector seed
};

struct SpectralPair
{
    double lambda = 0.0;
    Eigen::VectorXd w;
    /// ||K w - lambda M w|| / (||K w|| + lambda ||M w||)
    double residual = 0.0;
    bool normalized = false;
};

double relative_residual(const GlobalSystem& system, double lambda, const Eigen::VectorXd& w);

/// Smallest positive eigenpairs of K w = lambda M w, ascending, each normalized.
///
/// Works on the shifted pencil M x = mu (K + M) x, mu = 1/(lambda + 1): K + M is
/// factorized once and a thick-restart Lanczos iteration in the (K + M) inner
/// product extracts the largest mu < 1. The constant mode (mu = 1, lambda = 0) is
/// removed by M-orthogonal projection at every step, which also keeps each
/// returned eigenvector mean-free on gamma0.
std::vector<SpectralPair> solve_smallest_positive(const GlobalSystem& system, const SolveOptions& options = {});

/// Scales w so that w^T M w = 1 and the first gamma0 dof with |w_i| > 1e-8 is positive.
SpectralPair normalize(SpectralPair pair, const GlobalSystem& system);

/// All finite eigenvalues (including the zero mode) from a dense solve of the
/// shifted pencil, ascending. Limited to 2000 dofs.
std::vector<double> dense_reference_solve(const GlobalSystem& system);

}  // namespace steklov
