#include "steklov/experiments.hpp"

#include "steklov/mesh_io.hpp"
#include "steklov/vem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace steklov {

namespace {

std::optional<BoundaryTag> top_is_gamma0(Point2 a, Point2 b)
{
    constexpr double tol = 1e-12;
    if (std::abs(a.y - 1.0) < tol && std::abs(b.y - 1.0) < tol) return BoundaryTag::Gamma0;
    return BoundaryTag::Gamma1;
}

PolygonalMesh square_mesh()
{
    // 4 x 4 squares, each split into four triangles through its center.
    constexpr int n = 4;
    std::vector<Point2> vertices;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    auto grid = [](int i, int j) { return static_cast<std::size_t>(j * (n + 1) + i); };

    std::vector<std::vector<std::size_t>> cells;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t center = vertices.size();
            vertices.push_back({(i + 0.5) / n, (j + 0.5) / n});
            const std::size_t a = grid(i, j), b = grid(i + 1, j), c = grid(i + 1, j + 1), d = grid(i, j + 1);
            cells.push_back({center, a, b});
            cells.push_back({center, b, c});
            cells.push_back({center, c, d});
            cells.push_back({center, d, a});
        }
    }
    auto rule = tag_by_geometry(vertices, top_is_gamma0);
    return build_topology(std::move(vertices), std::move(cells), rule);
}

PolygonalMesh notched_mesh()
{
    const double apex = std::sqrt(3.0) / 6.0;
    std::vector<Point2> vertices{{0.0, 0.0}, {1.0 / 3.0, 0.0}, {0.5, apex}, {2.0 / 3.0, 0.0}, {1.0, 0.0}};
    for (double y : {0.5, 0.75, 1.0})
        for (int i = 0; i <= 4; ++i) vertices.push_back({i / 4.0, y});
    auto row = [](int r, int i) { return static_cast<std::size_t>(5 + 5 * r + i); };

    // Strip below y = 1/2 around the notch.
    std::vector<std::vector<std::size_t>> cells{{0, 1, row(0, 1)}, {0, row(0, 1), row(0, 0)},
                                                {1, 2, row(0, 1)}, {2, row(0, 2), row(0, 1)},
                                                {2, row(0, 3), row(0, 2)}, {3, row(0, 3), 2},
                                                {3, 4, row(0, 3)}, {4, row(0, 4), row(0, 3)}};
    // Crossed squares above.
    for (int r = 0; r < 2; ++r) {
        for (int i = 0; i < 4; ++i) {
            const std::size_t center = vertices.size();
            vertices.push_back({(i + 0.5) / 4.0, 0.5 + (r + 0.5) / 4.0});
            const std::size_t a = row(r, i), b = row(r, i + 1), c = row(r + 1, i + 1), d = row(r + 1, i);
            cells.push_back({center, a, b});
            cells.push_back({center, b, c});
            cells.push_back({center, c, d});
            cells.push_back({center, d, a});
        }
    }
    auto rule = tag_by_geometry(vertices, top_is_gamma0);
    return orient_longest_edge(build_topology(std::move(vertices), std::move(cells), rule));
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string format_step_name(const char* stem, std::size_t step, const char* ext)
{
    return std::string(stem) + std::to_string(step) + ext;
}

}  // namespace

TestCase parse_test_case(const std::string& name)
{
    if (name == "square") return TestCase::SquareSloshing;
    if (name == "notched") return TestCase::NotchedSquare;
    throw std::invalid_argument("unknown test '" + name + "' (expected square|notched)");
}

Method parse_method(const std::string& name)
{
    if (name == "uniform-fem") return Method::UniformFem;
    if (name == "adaptive-fem") return Method::AdaptiveFem;
    if (name == "adaptive-vem") return Method::AdaptiveVem;
    throw std::invalid_argument("unknown method '" + name + "' (expected uniform-fem|adaptive-fem|adaptive-vem)");
}

std::string to_string(TestCase test) { return test == TestCase::SquareSloshing ? "square" : "notched"; }

std::string to_string(Method method)
{
    switch (method) {
    case Method::UniformFem: return "uniform-fem";
    case Method::AdaptiveFem: return "adaptive-fem";
    case Method::AdaptiveVem: return "adaptive-vem";
    }
    return "unknown";
}

double exact_eigenvalue_square(int n)
{
    if (n < 1) throw std::invalid_argument("exact_eigenvalue_square: n must be >= 1");
    const double x = n * std::numbers::pi;
    return x * std::tanh(x);
}

PolygonalMesh initial_mesh(TestCase test)
{
    return test == TestCase::SquareSloshing ? square_mesh() : notched_mesh();
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    if (config.steps < 1) throw std::invalid_argument("run_experiment: steps must be >= 1");
    if (!(config.mark_fraction > 0.0 && config.mark_fraction <= 1.0))
        throw std::invalid_argument("run_experiment: mark fraction must lie in (0, 1]");

    ExperimentResult result;
    result.config = config;
    if (config.reference)
        result.reference = *config.reference;
    else if (config.test == TestCase::SquareSloshing)
        result.reference = exact_eigenvalue_square(1);
    else
        result.reference = notched_reference_eigenvalue();

    if (config.output_dir) std::filesystem::create_directories(*config.output_dir);

    PolygonalMesh mesh = initial_mesh(config.test);
    try {
        for (std::size_t step = 0; step < config.steps; ++step) {
            const auto start = std::chrono::steady_clock::now();
            const auto locals = local_operators(mesh);
            const GlobalSystem system = assemble(mesh, locals);
            const auto pairs = solve_smallest_positive(system, config.solver);
            const auto indicators = element_indicators(mesh, locals, pairs.front());
            const auto estimate = global_estimate(indicators, result.reference, pairs.front().lambda);
            const auto stop = std::chrono::steady_clock::now();

            StepRecord rec;
            rec.step = step;
            rec.dofs = system.dofs.num_dofs;
            rec.lambda_h = pairs.front().lambda;
            rec.error = std::abs(result.reference - rec.lambda_h);
            rec.theta2 = estimate.theta2;
            rec.jump2 = estimate.jump2;
            rec.eta2 = estimate.eta2;
            rec.effectivity = estimate.effectivity.value_or(0.0);
            rec.wall_time = std::chrono::duration<double>(stop - start).count();
            for (std::size_t k = 1; k < pairs.size(); ++k) rec.higher_lambdas.push_back(pairs[k].lambda);
            result.records.push_back(rec);

            if (config.output_dir && config.dump_indicators)
                write_indicators_csv(indicators, *config.output_dir / format_step_name("indicators_step_", step, ".csv"));
            if (config.output_dir && config.dump_matrices) {
                write_coordinate(system.stiffness, *config.output_dir / format_step_name("K_step_", step, ".txt"));
                write_coordinate(system.boundary_mass, *config.output_dir / format_step_name("M_step_", step, ".txt"));
            }

            MarkSet marks;
            if (config.method != Method::UniformFem) {
                marks = mark(indicators, config.mark_fraction);
                if (marks.cells.empty()) std::cerr << "warning: all indicators vanish at step " << step << "; stopping\n";
            }
            const bool stalled = config.method != Method::UniformFem && marks.cells.empty();
            const bool last = step + 1 == config.steps || stalled;
            // The mesh after the final solve is only needed for output.
            PolygonalMesh next;
            if (!stalled && (!last || config.keep_meshes)) {
                if (config.method == Method::UniformFem)
                    next = refine_uniform(mesh);
                else
                    next = config.method == Method::AdaptiveVem ? refine_vem(mesh, marks.cells).mesh
                                                                : refine_fem(mesh, marks.cells);
            }
            result.marks.push_back(std::move(marks));
            if (config.keep_meshes) result.meshes.push_back(std::move(mesh));
            if (last) {
                if (config.keep_meshes && !stalled) result.meshes.push_back(std::move(next));
                break;
            }
            mesh = std::move(next);
        }
    } catch (...) {
        if (config.output_dir) {
            try {
                write_text(*config.output_dir / "results.csv", results_csv(result.records));
            } catch (...) {
            }
        }
        throw;
    }
    return result;
}

RateFit fit_rate(std::span<const double> dofs, std::span<const double> errors, std::size_t m)
{
    if (dofs.size() != errors.size()) throw std::invalid_argument("fit_rate: size mismatch");
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        if (dofs[i] > 0.0 && errors[i] > 0.0) points.emplace_back(std::log(dofs[i]), std::log(errors[i]));
    }
    if (points.size() > m) points.erase(points.begin(), points.end() - static_cast<std::ptrdiff_t>(m));
    if (points.size() < 3) throw std::invalid_argument("fit_rate: fewer than 3 usable points");

    double sx = 0.0, sy = 0.0;
    for (auto [x, y] : points) {
        sx += x;
        sy += y;
    }
    const double k = static_cast<double>(points.size());
    const double mx = sx / k, my = sy / k;
    double sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: dof counts must differ");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = points.size();
    return fit;
}

RateFit fit_rate(std::span<const StepRecord> records, std::size_t m)
{
    std::vector<double> n, e;
    for (const auto& r : records) {
        n.push_back(static_cast<double>(r.dofs));
        e.push_back(r.error);
    }
    return fit_rate(n, e, m);
}

double extrapolate_limit(std::span<const double> dofs, std::span<const double> lambdas)
{
    if (dofs.size() != lambdas.size() || dofs.size() < 3)
        throw std::invalid_argument("extrapolate_limit: need at least 3 matching points");

    // For fixed p the model is linear in (lambda_inf, c); minimize the residual over p.
    auto solve = [&](double p, double& limit) {
        double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const double x = std::pow(dofs[i], -p);
            s1 += 1;
            sx += x;
            sxx += x * x;
            sy += lambdas[i];
            sxy += x * lambdas[i];
        }
        const double det = s1 * sxx - sx * sx;
        const double c = (s1 * sxy - sx * sy) / det;
        limit = (sy - c * sx) / s1;
        double res = 0;
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const double r = lambdas[i] - limit - c * std::pow(dofs[i], -p);
            res += r * r;
        }
        return res;
    };

    double best_p = 1.0, best = std::numeric_limits<double>::infinity(), limit = 0.0;
    for (double p = 0.3; p <= 2.0 + 1e-12; p += 0.01) {
        const double r = solve(p, limit);
        if (r < best) {
            best = r;
            best_p = p;
        }
    }
    // Golden-section polish around the grid minimum.
    double a = std::max(0.3, best_p - 0.01), b = std::min(2.0, best_p + 0.01);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (solve(c, limit) < solve(d, limit))
            b = d;
        else
            a = c;
    }
    solve(0.5 * (a + b), limit);
    return limit;
}

double notched_reference_eigenvalue(std::size_t target_dofs)
{
    PolygonalMesh mesh = initial_mesh(TestCase::NotchedSquare);
    std::vector<double> dofs, lambdas;
    while (true) {
        const auto locals = local_operators(mesh);
        const GlobalSystem system = assemble(mesh, locals);
        const auto pairs = solve_smallest_positive(system, {});
        dofs.push_back(static_cast<double>(system.dofs.num_dofs));
        lambdas.push_back(pairs.front().lambda);
        if (system.dofs.num_dofs >= target_dofs) break;
        const auto indicators = element_indicators(mesh, locals, pairs.front());
        mesh = refine_fem(mesh, mark(indicators, 0.5).cells);
    }
    // Tail of the sequence, starting where N exceeds target/10.
    std::size_t first = 0;
    while (first + 6 < dofs.size() && dofs[first] < static_cast<double>(target_dofs) / 10.0) ++first;
    return extrapolate_limit(std::span(dofs).subspan(first), std::span(lambdas).subspan(first));
}

std::string results_csv(std::span<const StepRecord> records)
{
    std::string out = "step,N,lambda_h,error,theta2,jump2,eta2,effectivity\n";
    char line[256];
    for (const auto& r : records) {
        std::snprintf(line, sizeof line, "%zu,%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.step, r.dofs,
                      r.lambda_h, r.error, r.theta2, r.jump2, r.eta2, r.effectivity);
        out += line;
    }
    return out;
}

std::string mesh_svg(const PolygonalMesh& mesh, std::span<const std::size_t> shaded)
{
    double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
    double xmax = -xmin, ymax = -xmin;
    for (const auto& p : mesh.vertices()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double size = 800.0, margin = 10.0;
    const double scale = (size - 2 * margin) / std::max(xmax - xmin, ymax - ymin);
    std::vector<bool> fill(mesh.num_cells(), false);
    for (auto c : shaded) fill.at(c) = true;

    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
       << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        os << "<polygon points=\"";
        for (auto v : mesh.cell(c)) {
            const auto& p = mesh.vertices()[v];
            os << margin + (p.x - xmin) * scale << ',' << size - margin - (p.y - ymin) * scale << ' ';
        }
        os << "\" fill=\"" << (fill[c] ? "#c8c8c8" : "none") << "\" stroke=\"black\" stroke-width=\"0.6\"/>\n";
    }
    for (const auto& e : mesh.edges()) {
        if (e.tag != BoundaryTag::Gamma0) continue;
        const auto& a = mesh.vertices()[e.vertices[0]];
        const auto& b = mesh.vertices()[e.vertices[1]];
        os << "<line x1=\"" << margin + (a.x - xmin) * scale << "\" y1=\"" << size - margin - (a.y - ymin) * scale
           << "\" x2=\"" << margin + (b.x - xmin) * scale << "\" y2=\"" << size - margin - (b.y - ymin) * scale
           << "\" stroke=\"#1f5fbf\" stroke-width=\"2\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_text(dir / "results.csv", results_csv(result.records));

    std::string curves = "method,N,error,eta2\n";
    char line[160];
    for (const auto& r : result.records) {
        std::snprintf(line, sizeof line, "%s,%zu,%.12g,%.12g\n", to_string(result.config.method).c_str(), r.dofs,
                      r.error, r.eta2);
        curves += line;
    }
    write_text(dir / "curves.csv", curves);

    for (std::size_t k = 0; k < result.meshes.size(); ++k) {
        save_mesh(result.meshes[k], dir / format_step_name("mesh_step_", k, ".json"));
        std::span<const std::size_t> shaded;
        if (k < result.marks.size()) shaded = result.marks[k].cells;
        write_text(dir / format_step_name("mesh_step_", k, ".svg"), mesh_svg(result.meshes[k], shaded));
    }
}

}  // namespace steklov
