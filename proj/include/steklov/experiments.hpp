#pragma once

#include "steklov/adaptivity.hpp"
#include "steklov/eigensolver.hpp"
#include "steklov/estimator.hpp"
#include "steklov/mesh.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace steklov {

enum class TestCase
{
    SquareSloshing,  ///< (0,1)^2, gamma0 = top edge
    NotchedSquare    ///< (0,1)^2 minus an equilateral notch on the bottom edge, gamma0 = top edge
};

enum class Method
{
    UniformFem,
    AdaptiveFem,
    AdaptiveVem
};

TestCase parse_test_case(const std::string& name);   // "square" | "notched"
Method parse_method(const std::string& name);        // "uniform-fem" | "adaptive-fem" | "adaptive-vem"
std::string to_string(TestCase test);
std::string to_string(Method method);

/// n pi tanh(n pi): eigenvalues of the sloshing square with gamma0 on top.
double exact_eigenvalue_square(int n);

/// Coarse triangle mesh. For NVB the longest edge of each triangle is its refinement edge.
PolygonalMesh initial_mesh(TestCase test);

struct ExperimentConfig
{
    TestCase test = TestCase::SquareSloshing;
    Method method = Method::AdaptiveVem;
    std::size_t steps = 8;
    double mark_fraction = 0.5;
    SolveOptions solver;
    /// Reference eigenvalue for errors; defaults to the closed form for the square
    /// and to notched_reference_eigenvalue() for the notched domain.
    std::optional<double> reference;
    bool keep_meshes = true;  ///< false also skips the refinement after the final solve
    bool dump_indicators = false;
    bool dump_matrices = false;
    std::optional<std::filesystem::path> output_dir;  ///< per-step dumps go here when set
};

struct StepRecord
{
    std::size_t step = 0;
    std::size_t dofs = 0;
    double lambda_h = 0.0;
    double error = 0.0;
    double theta2 = 0.0;
    double jump2 = 0.0;
    double eta2 = 0.0;
    double effectivity = 0.0;
    double wall_time = 0.0;  ///< seconds; not part of results.csv
    std::vector<double> higher_lambdas;  ///< lambda_h2, ... when count > 1
};

struct ExperimentResult
{
    ExperimentConfig config;
    double reference = 0.0;
    std::vector<StepRecord> records;
    /// The mesh solved at each step, then the final refined mesh (steps + 1 in total).
    std::vector<PolygonalMesh> meshes;
    std::vector<MarkSet> marks;  ///< cells marked at each step (empty for uniform)
};

/// assemble -> solve -> estimate -> mark -> refine, `steps` times.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct RateFit
{
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

/// Least-squares slope of log(error) against log(N) over the last m positive-error records.
RateFit fit_rate(std::span<const StepRecord> records, std::size_t m = 5);
RateFit fit_rate(std::span<const double> dofs, std::span<const double> errors, std::size_t m = 5);

/// lambda_inf of the fit lambda_h(N) = lambda_inf + c N^-p over the given points (p fitted too).
double extrapolate_limit(std::span<const double> dofs, std::span<const double> lambdas);

/// Self-computed reference for the notched domain: an adaptive FEM run to
/// about `target_dofs` unknowns followed by extrapolate_limit on its tail.
double notched_reference_eigenvalue(std::size_t target_dofs = 60000);

/// results.csv, curves.csv, mesh_step_k.json and mesh_step_k.svg in `dir`.
void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

std::string results_csv(std::span<const StepRecord> records);

/// Cells outlined; `shaded` cells filled.
std::string mesh_svg(const PolygonalMesh& mesh, std::span<const std::size_t> shaded = {});

}  // namespace steklov
