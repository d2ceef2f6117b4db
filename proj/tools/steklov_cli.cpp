#include "steklov/experiments.hpp"
#include "steklov/mesh_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace steklov;

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

int run_rate(const std::string& csv, std::size_t last)
{
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot open " + csv);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(csv + ": empty file");
    const auto header = split_csv_line(line);
    const auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error(csv + ": missing column '" + name + "'");
    };
    const std::size_t n_col = column("N"), e_col = column("error");
    std::vector<double> dofs, errors;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) throw std::runtime_error(csv + ": malformed row '" + line + "'");
        dofs.push_back(std::stod(fields[n_col]));
        errors.push_back(std::stod(fields[e_col]));
    }
    const RateFit fit = fit_rate(dofs, errors, last);
    std::printf("slope %.4f over last %zu points (error ~ N^%.2f)\n", fit.slope, fit.points, fit.slope);
    return 0;
}

int run_validate(const std::string& path)
{
    const PolygonalMesh mesh = load_mesh(path);
    std::size_t gamma0 = 0, gamma1 = 0;
    for (const auto& e : mesh.edges()) {
        gamma0 += e.tag == BoundaryTag::Gamma0;
        gamma1 += e.tag == BoundaryTag::Gamma1;
    }
    const auto report = quality_report(mesh);
    const auto junctions = find_t_junctions(mesh);
    std::printf("vertices %zu  cells %zu  edges %zu  (gamma0 %zu, gamma1 %zu)\n", mesh.num_vertices(),
                mesh.num_cells(), mesh.num_edges(), gamma0, gamma1);
    std::printf("area %.12g\n", total_area(mesh));
    std::printf("A2 ratio min %.4f (%zu cells below 0.1), A3 ratio min %.4f (%zu cells below 0.1)\n", report.gamma,
                report.a2_violations, report.gamma_hat, report.a3_violations);
    if (!junctions.empty()) {
        std::fprintf(stderr, "error: %zu vertices lie inside edges they do not belong to (first: %zu)\n",
                     junctions.size(), junctions.front());
        return 2;
    }
    std::printf("ok\n");
    return 0;
}

int run(const ExperimentConfig& config, const std::string& out)
{
    const ExperimentResult result = run_experiment(config);
    std::printf("%s / %s, reference lambda_1 = %.10f\n", to_string(config.test).c_str(),
                to_string(config.method).c_str(), result.reference);
    std::printf("%4s %8s %12s %10s %10s %10s %10s %8s %8s\n", "step", "N", "lambda_h", "error", "theta2", "J2",
                "eta2", "eff", "time[s]");
    for (const auto& r : result.records) {
        std::printf("%4zu %8zu %12.6f %10.3e %10.3e %10.3e %10.3e %8.4f %8.3f\n", r.step, r.dofs, r.lambda_h, r.error,
                    r.theta2, r.jump2, r.eta2, r.effectivity, r.wall_time);
    }
    if (result.records.size() >= 3) {
        const auto fit = fit_rate(result.records, 5);
        std::printf("rate over last %zu steps: O(N^%.2f)\n", fit.points, fit.slope);
    }
    emit_outputs(result, out);
    std::printf("outputs written to %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive virtual element solver for the Steklov eigenvalue problem"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run a convergence experiment");
    std::string test = "square", method = "adaptive-vem", out = "out";
    ExperimentConfig config;
    double reference = 0.0;
    run_cmd->add_option("--test", test, "square | notched")->check(CLI::IsMember({"square", "notched"}));
    run_cmd->add_option("--method", method, "uniform-fem | adaptive-fem | adaptive-vem")
        ->check(CLI::IsMember({"uniform-fem", "adaptive-fem", "adaptive-vem"}));
    run_cmd->add_option("--steps", config.steps, "number of solve steps")->check(CLI::PositiveNumber);
    run_cmd->add_option("--mark-frac", config.mark_fraction, "mark cells with eta_E >= frac * max eta")
        ->check(CLI::Range(1e-12, 1.0));
    run_cmd->add_option("--eigs", config.solver.count, "number of eigenvalues")->check(CLI::PositiveNumber);
    run_cmd->add_option("--tol", config.solver.tol, "eigensolver residual tolerance")->check(CLI::PositiveNumber);
    run_cmd->add_option("--max-iterations", config.solver.max_iterations, "eigensolver operator applications");
    run_cmd->add_option("--seed", config.solver.seed, "eigensolver start-vector seed");
    auto* ref_opt = run_cmd->add_option("--reference", reference, "reference eigenvalue for the error column");
    run_cmd->add_flag("--dump-indicators", config.dump_indicators, "write per-step indicator CSV files");
    run_cmd->add_flag("--dump-matrices", config.dump_matrices, "write per-step K and M in coordinate format");
    run_cmd->add_option("--out", out, "output directory");

    auto* rate_cmd = app.add_subcommand("rate", "fit the convergence rate of a results.csv");
    std::string csv;
    std::size_t last = 5;
    rate_cmd->add_option("--csv", csv, "results.csv file")->required();
    rate_cmd->add_option("--last", last, "number of trailing points")->check(CLI::Range(3, 1000000));

    auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
    mesh_cmd->require_subcommand(1);
    auto* validate_cmd = mesh_cmd->add_subcommand("validate", "check a JSON mesh file");
    std::string mesh_file;
    validate_cmd->add_option("file", mesh_file, "mesh JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            config.test = parse_test_case(test);
            config.method = parse_method(method);
            if (*ref_opt) config.reference = reference;
            config.output_dir = out;
            return run(config, out);
        }
        if (*rate_cmd) return run_rate(csv, last);
        if (*validate_cmd) return run_validate(mesh_file);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
