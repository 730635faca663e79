#pragma once

// Command-line front end: solve, study, measure, check-mesh.
// Exit codes: 0 ok, 1 solver failure, 2 invalid input.

#include "mafem/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace mafem {

namespace cli {

enum Exit { ok = 0, solver_failure = 1, invalid_input = 2 };

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProblemError("cannot open problem file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProblemError("problem file '" + path + "' is not valid JSON: " + e.what());
    }
}

inline std::filesystem::path out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write '" + file.string() + "'");
    os << text;
}

inline std::shared_ptr<const FeSpace> make_space(const PreparedProblem& data, int k, std::optional<double> h, int level) {
    Mesh m = h ? triangulate(data.domain, *h) : level_mesh(data.domain, level);
    return std::make_shared<const FeSpace>(std::make_shared<const Mesh>(std::move(m)), k);
}

struct Common {
    std::string problem;
    std::string out = ".";
    int k = -1;
};

inline ProblemSpec load(const Common& c) {
    ProblemSpec p = problem_from_json(read_json_file(c.problem));
    if (c.k > 0) p.k = c.k;
    if (p.k < 1 || p.k > 4) throw ProblemError("k must be between 1 and 4");
    return p;
}

inline int run_solve(const Common& c, std::optional<double> h, int level, const std::string& method, double nu,
                     std::ostream& log) {
    const ProblemSpec p = load(c);
    const PreparedProblem data = prepare(p);
    auto space = make_space(data, p.k, h, level);
    SolverConfig cfg = solver_config_for(p);
    cfg.nu = nu;
    const auto dir = out_dir(c.out);

    nlohmann::json report;
    report["problem"] = p.name;
    report["k"] = p.k;
    report["h"] = space->mesh().h();
    report["dofs"] = space->num_dofs();
    report["method"] = method;

    std::optional<FeFunction> u;
    try {
        if (method == "time_march" || method == "newton") {
            auto [s, r] = method == "newton" ? newton_solve(space, data.f, data.g, std::nullopt, cfg)
                                             : time_march(space, data.f, data.g, std::nullopt, cfg);
            u = std::move(s);
            report["solve"] = to_json(r);
        } else {
            auto [s, r] = solve_problem(space, data, cfg);
            u = std::move(s);
            report["solve"] = to_json(r);
        }
    } catch (const SolverError& e) {
        report["solve"] = to_json(e.report);
        report["failure"] = e.what();
        write_text(dir / "report.json", dump17(report));
        log << "solver failure: " << e.what() << "\n";
        return solver_failure;
    }

    report["convexity"] = to_json(analyze(*u));
    if (p.exact) {
        report["errors"] = {{"h2_broken", broken_error(*u, *p.exact, 2, Lp::L2)},
                            {"l2", broken_error(*u, *p.exact, 0, Lp::L2)},
                            {"linf", broken_error(*u, *p.exact, 0, Lp::Linf)}};
    }
    {
        std::ofstream ms(dir / "mesh.txt");
        write_mesh(ms, space->mesh());
    }
    write_fefunction(dir / "solution.txt", *u, "mesh.txt");
    std::ostringstream csv;
    csv << "x,y,u\n";
    for (int d = 0; d < space->num_dofs(); ++d) {
        const Point& x = space->dof_coords()[static_cast<std::size_t>(d)];
        csv << format17(x.x()) << "," << format17(x.y()) << "," << format17(u->coeffs()(d)) << "\n";
    }
    write_text(dir / "solution.csv", csv.str());
    write_text(dir / "report.json", dump17(report));
    log << "solved " << p.name << ": " << space->num_dofs() << " dofs, report in " << (dir / "report.json").string() << "\n";
    return ok;
}

inline int run_study(const Common& c, int levels, int first_level, std::ostream& log) {
    ProblemSpec p = load(c);
    if (levels > 0) p.levels = levels;
    if (first_level >= 0) p.first_level = first_level;
    const StudyReport r = run_convergence_study(p);
    const auto dir = out_dir(c.out);
    std::ostringstream csv;
    write_study_csv(csv, r);
    write_text(dir / "study.csv", csv.str());
    write_text(dir / "study.json", dump17(to_json(r)));
    log << csv.str();
    if (!r.complete) {
        log << "study incomplete: at least one level failed to converge\n";
        return solver_failure;
    }
    return ok;
}

inline int run_measure(const Common& c, int levels, int first_level, const std::string& solution, std::ostream& log) {
    ProblemSpec p = load(c);
    if (levels > 0) p.levels = levels;
    if (first_level >= 0) p.first_level = first_level;
    const PreparedProblem data = prepare(p);
    const auto bumps = default_bumps(p);
    const auto dir = out_dir(c.out);

    nlohmann::json report;
    report["problem"] = p.name;
    report["bumps"] = nlohmann::json::array();
    for (const auto& b : bumps) report["bumps"].push_back({{"center", {b.center.x(), b.center.y()}}, {"radius", b.radius}});
    report["levels"] = nlohmann::json::array();
    std::ostringstream csv;
    csv << "level,h,bump,residual\n";

    auto record = [&](int level, const FeFunction& u) {
        const auto res = run_measure_verification(u, data.f, bumps);
        const AleksandrovReport ab = aleksandrov_bound(u, data.f);
        report["levels"].push_back({{"level", level}, {"h", u.space().mesh().h()}, {"residuals", res}, {"aleksandrov", to_json(ab)}});
        for (std::size_t i = 0; i < res.size(); ++i)
            csv << level << "," << format17(u.space().mesh().h()) << "," << i << "," << format17(res[i]) << "\n";
    };

    if (!solution.empty()) {
        record(-1, read_fefunction(solution));
    } else {
        const SolverConfig cfg = solver_config_for(p);
        for (int l = p.first_level; l < p.first_level + p.levels; ++l) {
            auto space = make_space(data, p.k, std::nullopt, l);
            try {
                record(l, solve_problem(space, data, cfg).first);
            } catch (const SolverError& e) {
                write_text(dir / "measure.json", dump17(report));
                log << "solver failure at level " << l << ": " << e.what() << "\n";
                return solver_failure;
            }
        }
    }
    write_text(dir / "measure.csv", csv.str());
    write_text(dir / "measure.json", dump17(report));
    log << csv.str();
    return ok;
}

inline int run_check_mesh(const Common& c, const std::string& mesh_file, std::optional<double> h, int level, std::ostream& log) {
    std::optional<Mesh> mesh;
    if (!mesh_file.empty()) {
        std::ifstream in(mesh_file);
        if (!in) throw ProblemError("cannot open mesh file '" + mesh_file + "'");
        mesh = read_mesh(in);
    } else {
        if (c.problem.empty()) throw ProblemError("check-mesh needs --problem or --mesh");
        const ProblemSpec p = load(c);
        const ConvexPolygon domain = interior_subdomain(p.polygon, p.regularization.delta);
        mesh = h ? triangulate(domain, *h) : level_mesh(domain, level);
    }
    const ShapeMetrics sm = shape_metrics(*mesh);
    const bool conforming = mesh->is_conforming();
    nlohmann::json report{{"vertices", mesh->num_vertices()},
                          {"cells", mesh->num_cells()},
                          {"boundary_edges", mesh->boundary_edges().size()},
                          {"h", mesh->h()},
                          {"h_min", mesh->h_min()},
                          {"max_aspect", sm.max_aspect},
                          {"quasi_uniformity", sm.quasi_uniformity},
                          {"area", mesh->total_area()},
                          {"conforming", conforming}};
    const std::string text = dump17(report);
    if (c.out != ".") write_text(out_dir(c.out) / "mesh_report.json", text);
    log << text;
    return conforming ? ok : invalid_input;
}

}  // namespace cli

/// Entry point of the `mafem` tool.
inline int cli_main(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Monge-Ampere finite element solver and verification toolkit"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // -h would clash with --h
    cli::Common common;
    std::optional<double> h;
    int level = 4, levels = -1, first_level = -1;
    double nu = 1.0;
    std::string method = "auto", mesh_file, solution;

    auto add_common = [&](CLI::App* sub, bool problem_required) {
        auto* opt = sub->add_option("--problem", common.problem, "problem JSON file");
        if (problem_required) opt->required();
        sub->add_option("--k", common.k, "polynomial degree (overrides the problem file)");
        sub->add_option("--out", common.out, "output directory");
    };
    auto* solve = app.add_subcommand("solve", "solve one problem on one mesh");
    add_common(solve, true);
    solve->add_option("--h", h, "target mesh size");
    solve->add_option("--level", level, "refinement level (when --h is absent)");
    solve->add_option("--method", method, "auto, newton or time_march")->check(CLI::IsMember({"auto", "newton", "time_march"}));
    solve->add_option("--nu", nu, "pseudo-time parameter for time_march (must exceed about half the largest Hessian eigenvalue)")
        ->check(CLI::PositiveNumber);

    auto* study = app.add_subcommand("study", "convergence study over mesh levels");
    add_common(study, true);
    study->add_option("--levels", levels, "number of levels");
    study->add_option("--first-level", first_level, "coarsest level");

    auto* measure = app.add_subcommand("measure", "weak measure residuals of computed solutions");
    add_common(measure, true);
    measure->add_option("--levels", levels, "number of levels");
    measure->add_option("--first-level", first_level, "coarsest level");
    measure->add_option("--solution", solution, "measure a stored solution instead of solving");

    auto* check = app.add_subcommand("check-mesh", "mesh quality report");
    add_common(check, false);
    check->add_option("--mesh", mesh_file, "mesh file");
    check->add_option("--h", h, "target mesh size");
    check->add_option("--level", level, "refinement level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, log, err);
        return code == 0 ? cli::ok : cli::invalid_input;
    }
    try {
        if (h && !(*h > 0.0)) throw ProblemError("--h must be positive");
        if (*solve) return cli::run_solve(common, h, level, method, nu, log);
        if (*study) return cli::run_study(common, levels, first_level, log);
        if (*measure) return cli::run_measure(common, levels, first_level, solution, log);
        return cli::run_check_mesh(common, mesh_file, h, level, log);
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return cli::solver_failure;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return cli::invalid_input;
    } catch (const GeometryError& e) {
        err << "invalid input: " << e.what() << "\n";
        return cli::invalid_input;
    } catch (const MeshError& e) {
        err << "invalid input: " << e.what() << "\n";
        return cli::invalid_input;
    } catch (const FeError& e) {
        err << "invalid input: " << e.what() << "\n";
        return cli::invalid_input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return cli::solver_failure;
    }
}

}  // namespace mafem
