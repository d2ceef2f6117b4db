#include "steklov/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

namespace steklov {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Basis of the Krylov space, orthonormal in the (K + M) inner product, with the
/// images needed for Rayleigh-Ritz kept alongside.
struct KrylovBasis
{
    MatrixXd v;   // basis vectors
    MatrixXd bv;  // (K + M) v
    Index cols = 0;

    KrylovBasis(Index n, Index capacity) : v(n, capacity), bv(n, capacity) {}
};

class ShiftedOperator
{
public:
    explicit ShiftedOperator(const GlobalSystem& system)
        : k_(system.stiffness), m_(system.boundary_mass), ones_(VectorXd::Ones(system.stiffness.rows()))
    {
        shifted_ = k_ + m_;
        llt_.compute(shifted_);
        if (llt_.info() != Eigen::Success)
            throw SolverError("factorization of K + M failed (disconnected mesh or broken assembly)");
        m_ones_ = m_ * ones_;
        ones_mass_ = ones_.dot(m_ones_);
        if (!(ones_mass_ > 0.0)) throw SolverError("boundary mass is zero: gamma0 is empty");
    }

    /// Removes the constant component, M-orthogonally.
    void deflate(VectorXd& x) const { x -= (m_ones_.dot(x) / ones_mass_) * ones_; }

    /// (K + M)^{-1} M x, deflated.
    VectorXd apply(const VectorXd& x) const
    {
        VectorXd y = llt_.solve(m_ * x);
        deflate(y);
        return y;
    }

    VectorXd shifted_times(const VectorXd& x) const { return shifted_ * x; }
    const SparseMatrix& mass() const { return m_; }

private:
    const SparseMatrix& k_;
    const SparseMatrix& m_;
    SparseMatrix shifted_;
    Eigen::SimplicialLLT<SparseMatrix> llt_;
    VectorXd ones_;
    VectorXd m_ones_;
    double ones_mass_ = 0.0;
};

/// Orthogonalizes y against the basis (two passes of classical Gram-Schmidt) and
/// returns its (K + M)-norm before and after.
std::pair<double, double> orthogonalize(const ShiftedOperator& op, const KrylovBasis& basis, VectorXd& y,
                                        VectorXd& by)
{
    by = op.shifted_times(y);
    const double before = std::sqrt(std::max(y.dot(by), 0.0));
    for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols == 0) break;
        const VectorXd c = basis.bv.leftCols(basis.cols).transpose() * y;
        y.noalias() -= basis.v.leftCols(basis.cols) * c;
        by.noalias() -= basis.bv.leftCols(basis.cols) * c;
    }
    const double after = std::sqrt(std::max(y.dot(by), 0.0));
    return {before, after};
}

void append(KrylovBasis& basis, const VectorXd& y, const VectorXd& by, double norm)
{
    basis.v.col(basis.cols) = y / norm;
    basis.bv.col(basis.cols) = by / norm;
    ++basis.cols;
}

}  // namespace

double relative_residual(const GlobalSystem& system, double lambda, const Eigen::VectorXd& w)
{
    const VectorXd kw = system.stiffness * w;
    const VectorXd mw = system.boundary_mass * w;
    const double denom = kw.norm() + std::abs(lambda) * mw.norm();
    if (denom == 0.0) return 0.0;
    return (kw - lambda * mw).norm() / denom;
}

std::vector<SpectralPair> solve_smallest_positive(const GlobalSystem& system, const SolveOptions& options)
{
    if (options.count < 1) throw std::invalid_argument("solve_smallest_positive: count must be >= 1");
    if (!(options.tol > 0.0)) throw std::invalid_argument("solve_smallest_positive: tol must be positive");
    const auto n = static_cast<Index>(system.dofs.num_dofs);
    if (system.dofs.gamma0_dofs.size() < 2) throw SolverError("gamma0 must carry at least two dofs");
    // Number of positive discrete eigenvalues: gamma0 dofs minus the constant mode.
    const auto positive_modes = static_cast<Index>(system.dofs.gamma0_dofs.size()) - 1;
    const auto count = static_cast<Index>(options.count);
    if (count > positive_modes) {
        std::ostringstream os;
        os << "requested " << count << " eigenvalues but the discrete problem has only " << positive_modes;
        throw SolverError(os.str());
    }

    const ShiftedOperator op(system);
    const Index max_dim = std::min<Index>(positive_modes, std::max<Index>(2 * count + 20, 30));
    const Index keep = std::min<Index>(max_dim - 1, count + std::max<Index>(count, 5));

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    auto random_vector = [&] {
        VectorXd x(n);
        for (Index i = 0; i < n; ++i) x[i] = uniform(rng);
        return x;
    };

    KrylovBasis basis(n, max_dim + 1);
    std::size_t applications = 0;
    VectorXd y, by;

    // Returns false when the Krylov space is exhausted.
    auto extend_with = [&](VectorXd candidate) {
        for (int attempt = 0; attempt < 5; ++attempt) {
            auto [before, after] = orthogonalize(op, basis, candidate, by);
            if (after > 1e-10 * before && after > 0.0) {
                append(basis, candidate, by, after);
                return true;
            }
            if (basis.cols >= positive_modes) return false;
            candidate = op.apply(random_vector());
            ++applications;
        }
        return false;
    };

    extend_with(op.apply(random_vector()));
    ++applications;

    double best_residual = std::numeric_limits<double>::infinity();
    bool exhausted = false;
    while (true) {
        while (basis.cols < max_dim && !exhausted) {
            y = op.apply(basis.v.col(basis.cols - 1));
            ++applications;
            exhausted = !extend_with(y);
        }
        if (basis.cols >= positive_modes) exhausted = true;

        // Rayleigh-Ritz: with a (K + M)-orthonormal basis, V^T M V represents the operator.
        const Index m = basis.cols;
        const MatrixXd mv = op.mass() * basis.v.leftCols(m);
        MatrixXd t = basis.v.leftCols(m).transpose() * mv;
        t = 0.5 * (t + t.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(t);
        if (ritz.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz eigensolve failed");

        // Largest mu first.
        std::vector<SpectralPair> pairs;
        bool converged = true;
        double worst = 0.0;
        for (Index j = 0; j < count; ++j) {
            const Index col = m - 1 - j;
            const double mu = ritz.eigenvalues()[col];
            if (!(mu > 0.0)) throw SolverError("non-positive Ritz value; the pencil is inconsistent");
            SpectralPair pair;
            pair.lambda = std::max(1.0 / mu - 1.0, 0.0);
            pair.w = basis.v.leftCols(m) * ritz.eigenvectors().col(col);
            op.deflate(pair.w);
            pair.residual = relative_residual(system, pair.lambda, pair.w);
            worst = std::max(worst, pair.residual);
            converged = converged && pair.residual <= options.tol;
            pairs.push_back(std::move(pair));
        }
        best_residual = std::min(best_residual, worst);

        if (converged || (exhausted && m >= positive_modes)) {
            if (!converged) {
                std::ostringstream os;
                os << "eigensolver stagnated on the full Krylov space with residual " << worst;
                throw SolverError(os.str());
            }
            for (auto& p : pairs) p = normalize(std::move(p), system);
            return pairs;
        }
        if (applications >= options.max_iterations) {
            std::ostringstream os;
            os << "eigensolver did not converge within " << options.max_iterations
               << " iterations (best residual " << best_residual << ")";
            throw SolverError(os.str());
        }

        // Thick restart: keep the leading Ritz vectors plus the next Krylov direction.
        VectorXd next = op.apply(basis.v.col(m - 1));
        ++applications;
        orthogonalize(op, basis, next, by);
        const MatrixXd s = ritz.eigenvectors().rightCols(keep);
        const MatrixXd v_new = basis.v.leftCols(m) * s;
        const MatrixXd bv_new = basis.bv.leftCols(m) * s;
        basis.v.leftCols(keep) = v_new;
        basis.bv.leftCols(keep) = bv_new;
        basis.cols = keep;
        exhausted = !extend_with(std::move(next));
    }
}

SpectralPair normalize(SpectralPair pair, const GlobalSystem& system)
{
    const double b = pair.w.dot(system.boundary_mass * pair.w);
    if (!(b > 1e-300)) throw SolverError("eigenvector has zero boundary norm (deflation failure)");
    pair.w /= std::sqrt(b);
    for (auto dof : system.dofs.gamma0_dofs) {
        const double value = pair.w[static_cast<Index>(dof)];
        if (std::abs(value) > 1e-8) {
            if (value < 0.0) pair.w = -pair.w;
            break;
        }
    }
    pair.normalized = true;
    return pair;
}

std::vector<double> dense_reference_solve(const GlobalSystem& system)
{
    if (system.dofs.num_dofs > 2000) throw std::invalid_argument("dense_reference_solve: more than 2000 dofs");
    const MatrixXd k = MatrixXd(system.stiffness);
    const MatrixXd m = MatrixXd(system.boundary_mass);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(m, k + m);
    if (ges.info() != Eigen::Success) throw SolverError("dense generalized eigensolve failed");
    std::vector<double> lambdas;
    for (Index i = 0; i < ges.eigenvalues().size(); ++i) {
        const double mu = ges.eigenvalues()[i];
        if (mu > 1e-10) lambdas.push_back(std::max(1.0 / mu - 1.0, 0.0));
    }
    std::sort(lambdas.begin(), lambdas.end());
    return lambdas;
}

}  // namespace steklov
