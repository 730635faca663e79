#pragma once

// Convergence studies, measure verification and report serialization.

#include "mafem/ma_measure.hpp"
#include "mafem/problems.hpp"
#include "mafem/solver.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace mafem {

/// Base mesh (centroid fan) refined `level` times.
inline Mesh level_mesh(const ConvexPolygon& polygon, int level) {
    Mesh m = triangulate(polygon, std::numeric_limits<double>::infinity());
    for (int l = 0; l < level; ++l) m = refine_uniform(m);
    return m;
}

/// Regular grid of (n + 1)^2 bounding-box points, kept if inside the polygon.
inline std::vector<Point> grid_samples(const ConvexPolygon& polygon, int n = 100) {
    Point lo = polygon.vertex(0), hi = lo;
    for (const auto& v : polygon.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    std::vector<Point> out;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const Point p(lo.x() + (hi.x() - lo.x()) * i / n, lo.y() + (hi.y() - lo.y()) * j / n);
            if (polygon.contains(p, 1e-12)) out.push_back(p);
        }
    return out;
}

/// Fixed compact for sup errors: the problem's own, else the inner offset by
/// a fifth of the inradius.
inline ConvexPolygon measurement_compact(const ProblemSpec& p) {
    return p.interior_compact ? *p.interior_compact : interior_subdomain(p.polygon, 0.2 * p.polygon.inradius());
}

/// Three bumps inside the measurement compact, fixed per problem.
inline std::vector<Bump> default_bumps(const ProblemSpec& p) {
    const ConvexPolygon k = measurement_compact(p);
    const Point c = k.centroid();
    const double rho = k.inradius();
    return {Bump{c, 0.6 * rho, 1.0}, Bump{c + Point(0.3 * rho, 0.1 * rho), 0.5 * rho, 1.0},
            Bump{c + Point(-0.2 * rho, 0.25 * rho), 0.45 * rho, 1.0}};
}

/// Least-squares slope of log e against log h.
inline double least_squares_rate(const std::vector<double>& h, const std::vector<double>& e) {
    if (h.size() != e.size() || h.size() < 2) throw std::invalid_argument("least_squares_rate: need two or more matching samples");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        mx += std::log(h[i]) / n;
        my += std::log(e[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        sxy += (std::log(h[i]) - mx) * (std::log(e[i]) - my);
        sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
    }
    return sxy / sxx;
}

/// The data actually handed to the solver, and the domain it lives on.
struct PreparedProblem {
    ConvexPolygon domain;  ///< Omega~ = inner offset by delta
    ScalarField f;
    ScalarField g;
    DataBounds bounds;
    std::vector<std::string> log;
};

inline PreparedProblem prepare(const ProblemSpec& p) {
    PreparedProblem out{interior_subdomain(p.polygon, p.regularization.delta), p.f, p.g, {}, {}};
    if (p.regularization.mollify_radius) {
        RegularizationPlan plan;
        plan.mollify_radius = p.regularization.mollify_radius;
        RegularizedData d = regularize(p.f, p.g, p.polygon, plan);
        out.f = d.f_m;
        out.g = d.g_m;
        out.log = d.log;
    }
    out.bounds = validate_bounds(out.f, out.domain, 1000);
    return out;
}

inline SolverConfig solver_config_for(const ProblemSpec& p) {
    SolverConfig cfg;
    if (!p.regularization.epsilon_schedule.empty()) {
        cfg.continuation_kind = ContinuationKind::Shift;
        cfg.continuation_schedule = p.regularization.epsilon_schedule;
    } else if (!p.regularization.truncate_M.empty()) {
        cfg.continuation_kind = ContinuationKind::Truncate;
        cfg.continuation_schedule = p.regularization.truncate_M;
    }
    return cfg;
}

/// Solves on one space with the problem's pathway: shift or truncation
/// continuation when a schedule is configured, plain Newton otherwise.
inline std::pair<FeFunction, SolveReport> solve_problem(std::shared_ptr<const FeSpace> space, const PreparedProblem& data,
                                                        const SolverConfig& cfg) {
    if (!cfg.continuation_schedule.empty()) return continuation_solve(space, data.f, data.g, cfg);
    return newton_solve(space, data.f, data.g, std::nullopt, cfg);
}

// ---------------------------------------------------------------- study

struct LevelResult {
    int level = 0;
    double h = 0.0;
    int dofs = 0;
    double err_h2_broken = 0.0;
    double err_l2 = 0.0;
    double err_linf = 0.0;
    double err_linf_interior = 0.0;
    std::optional<double> rate_h2;
    std::optional<double> rate_linf_interior;
    bool saturated = false;  ///< both errors at round-off, rate meaningless
    SolveReport solve;
    double min_lambda = 0.0;
    int nonconvex_cells = 0;
    std::vector<double> measure_residuals;
    std::string failure;
};

struct StudyReport {
    std::string problem;
    int k = 2;
    DataBounds bounds;
    std::optional<double> consistency;  ///< worst relative |det D^2 u - f|
    std::vector<LevelResult> levels;
    std::optional<double> least_squares_rate_h2;
    bool complete = true;
    std::vector<std::string> notes;
};

namespace detail {

inline constexpr double saturation_level = 1e-10;

/// Broken norm of fine - coarse on the fine mesh (meshes nested).
inline double nested_difference(const FeFunction& fine, const FeFunction& coarse, int t, Lp p) {
    const FeSpace& space = fine.space();
    auto jet_at = [&](std::size_t c, const std::array<double, 3>& b) {
        Jet j = fine.jet(c, b);
        const Jet r = coarse.jet(space.map_to_cell(c, b));
        j.value -= r.value;
        j.grad -= r.grad;
        j.hess -= r.hess;
        return j;
    };
    return aggregate(cell_norms(space, jet_at, t, false, p, 2 * space.degree() + 2), p);
}

inline void fill_rates(std::vector<LevelResult>& levels) {
    for (std::size_t i = 1; i < levels.size(); ++i) {
        auto& a = levels[i - 1];
        auto& b = levels[i];
        if (!a.failure.empty() || !b.failure.empty()) continue;
        const double dh = std::log2(a.h / b.h);
        if (a.err_h2_broken < saturation_level && b.err_h2_broken < saturation_level) {
            b.saturated = true;
            continue;
        }
        b.rate_h2 = std::log2(a.err_h2_broken / b.err_h2_broken) / dh;
        if (a.err_linf_interior > 0.0 && b.err_linf_interior > 0.0)
            b.rate_linf_interior = std::log2(a.err_linf_interior / b.err_linf_interior) / dh;
    }
}

}  // namespace detail

/// Measure residuals |sum_K int_K det(D^2 u_h) p - int f p| per bump.
inline std::vector<double> run_measure_verification(const FeFunction& u, const ScalarField& f, const std::vector<Bump>& bumps) {
    std::vector<double> out;
    for (const auto& b : bumps) out.push_back(std::abs(integrate_against_measure(u, b) - integrate_density(u.space(), f, b)));
    return out;
}

inline std::vector<double> run_measure_verification(const ProblemSpec& p, const FeFunction& u) {
    return run_measure_verification(u, prepare(p).f, default_bumps(p));
}

/// Solves every level and measures errors against the exact solution, or
/// against the finest level when there is none. A failed level is recorded
/// and the study continues.
inline StudyReport run_convergence_study(const ProblemSpec& p) {
    StudyReport rep;
    rep.problem = p.name;
    rep.k = p.k;
    const PreparedProblem data = prepare(p);
    rep.bounds = data.bounds;
    rep.notes = data.log;
    if (p.exact && p.exact->hessian) rep.consistency = exact_consistency(p);
    const SolverConfig cfg = solver_config_for(p);
    const ConvexPolygon compact = measurement_compact(p);
    const auto sup_points = grid_samples(compact);
    const auto bumps = default_bumps(p);

    std::vector<std::optional<FeFunction>> solutions;
    for (int l = p.first_level; l < p.first_level + p.levels; ++l) {
        LevelResult r;
        r.level = l;
        auto space = std::make_shared<const FeSpace>(std::make_shared<const Mesh>(level_mesh(data.domain, l)), p.k);
        r.h = space->mesh().h();
        r.dofs = space->num_dofs();
        try {
            auto [u, sr] = solve_problem(space, data, cfg);
            r.solve = sr;
            const ConvexityReport cr = analyze(u);
            r.min_lambda = cr.global_min_lambda;
            r.nonconvex_cells = static_cast<int>(std::count_if(cr.cell_min_lambda.begin(), cr.cell_min_lambda.end(),
                                                               [&](double v) { return v < -cr.tol; }));
            r.measure_residuals = run_measure_verification(u, data.f, bumps);
            if (p.exact) {
                r.err_h2_broken = broken_error(u, *p.exact, 2, Lp::L2);
                r.err_l2 = broken_error(u, *p.exact, 0, Lp::L2);
                r.err_linf = broken_error(u, *p.exact, 0, Lp::Linf);
                for (const auto& x : sup_points) r.err_linf_interior = std::max(r.err_linf_interior, std::abs(u(x) - p.exact->value(x)));
            }
            solutions.emplace_back(std::move(u));
        } catch (const SolverError& e) {
            r.failure = e.what();
            r.solve = e.report;
            rep.complete = false;
            solutions.emplace_back(std::nullopt);
        }
        rep.levels.push_back(std::move(r));
    }

    if (!p.exact) {
        rep.notes.push_back("no exact solution: errors are measured against the finest level");
        const auto& ref = solutions.back();
        for (std::size_t i = 0; i < rep.levels.size(); ++i) {
            if (!ref || !solutions[i]) continue;
            auto& r = rep.levels[i];
            r.err_h2_broken = detail::nested_difference(*ref, *solutions[i], 2, Lp::L2);
            r.err_l2 = detail::nested_difference(*ref, *solutions[i], 0, Lp::L2);
            r.err_linf = detail::nested_difference(*ref, *solutions[i], 0, Lp::Linf);
            for (const auto& x : sup_points) r.err_linf_interior = std::max(r.err_linf_interior, std::abs((*ref)(x) - (*solutions[i])(x)));
        }
        if (ref) rep.levels.pop_back();  // zero by construction
    }
    detail::fill_rates(rep.levels);

    std::vector<double> hs, es;
    for (const auto& r : rep.levels)
        if (r.failure.empty() && r.err_h2_broken >= detail::saturation_level) {
            hs.push_back(r.h);
            es.push_back(r.err_h2_broken);
        }
    if (hs.size() >= 2) rep.least_squares_rate_h2 = least_squares_rate(hs, es);
    return rep;
}

// ---------------------------------------------------------------- serialization

/// 17 significant digits, the precision used for every float in reports.
inline std::string format17(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// JSON text with floats printed at 17 significant digits; non-finite
/// floats become null.
inline void dump17(std::ostream& os, const nlohmann::json& j, int indent = 2, int depth = 0) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                os << pad << nlohmann::json(it.key()).dump() << ": ";
                dump17(os, it.value(), indent, depth + 1);
                os << (i + 1 < j.size() ? ",\n" : "\n");
            }
            os << close << "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ", ";
                dump17(os, j[i], indent, depth + 1);
            }
            os << "]";
            return;
        }
        case nlohmann::json::value_t::number_float: {
            const double v = j.get<double>();
            os << (std::isfinite(v) ? format17(v) : "null");
            return;
        }
        default:
            os << j.dump();
    }
}

inline std::string dump17(const nlohmann::json& j) {
    std::ostringstream os;
    dump17(os, j);
    os << "\n";
    return os.str();
}

inline nlohmann::json to_json(const SolveReport& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["residual_history"] = r.residual_history;
    j["step_history"] = r.step_history;
    j["min_eigenvalue"] = r.min_lambda;
    j["wall_time_s"] = r.wall_time;
    j["safeguard_count"] = r.safeguard_count;
    if (!r.stages.empty()) {
        j["stages"] = nlohmann::json::array();
        for (const auto& s : r.stages)
            j["stages"].push_back({{"parameter", s.parameter}, {"iterations", s.iterations}, {"converged", s.converged}, {"final_residual", s.final_residual}});
    }
    return j;
}

inline nlohmann::json to_json(const ConvexityReport& r, bool per_cell = false) {
    nlohmann::json j{{"global_min_lambda", r.global_min_lambda}, {"global_min_det", r.global_min_det}, {"convex", r.convex},
                     {"strictly_convex", r.strictly_convex}, {"tol", r.tol}, {"sample_order", r.sample_order}};
    if (per_cell) {
        j["cell_min_lambda"] = r.cell_min_lambda;
        j["cell_min_det"] = r.cell_min_det;
    }
    return j;
}

inline nlohmann::json to_json(const AleksandrovReport& r) {
    return {{"slack", r.slack}, {"boundary_min", r.boundary_min}, {"diameter", r.diameter}, {"integral_a", r.integral_a},
            {"c_n", r.c_n}, {"worst", {r.worst.x(), r.worst.y()}}, {"samples", r.samples}};
}

inline nlohmann::json to_json(const MaMeasure& m) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& [v, a] : m.vertex_atoms) atoms.push_back({{"vertex", v}, {"mass", a}});
    return {{"total", m.total()}, {"cell_mass", m.cell_mass}, {"vertex_atoms", atoms}};
}

inline nlohmann::json to_json(const StudyReport& r) {
    nlohmann::json j;
    j["problem"] = r.problem;
    j["k"] = r.k;
    j["bounds"] = {{"c0", r.bounds.c0}, {"c1", r.bounds.c1}, {"degenerate", r.bounds.degenerate}};
    j["consistency"] = r.consistency ? nlohmann::json(*r.consistency) : nlohmann::json(nullptr);
    j["least_squares_rate_h2"] = r.least_squares_rate_h2 ? nlohmann::json(*r.least_squares_rate_h2) : nlohmann::json(nullptr);
    j["complete"] = r.complete;
    j["notes"] = r.notes;
    j["levels"] = nlohmann::json::array();
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    for (const auto& l : r.levels) {
        nlohmann::json e{{"level", l.level},
                         {"h", l.h},
                         {"dofs", l.dofs},
                         {"err_h2_broken", l.err_h2_broken},
                         {"err_l2", l.err_l2},
                         {"err_linf", l.err_linf},
                         {"err_linf_interior", l.err_linf_interior},
                         {"rate_h2", opt(l.rate_h2)},
                         {"rate_linf_interior", opt(l.rate_linf_interior)},
                         {"saturated", l.saturated},
                         {"min_lambda", l.min_lambda},
                         {"nonconvex_cells", l.nonconvex_cells},
                         {"measure_residuals", l.measure_residuals},
                         {"solve", to_json(l.solve)}};
        if (!l.failure.empty()) e["failure"] = l.failure;
        j["levels"].push_back(std::move(e));
    }
    return j;
}

inline constexpr const char* study_csv_header = "level,h,dofs,err_h2_broken,err_linf_interior,rate_h2";

/// One row per level; the rate is empty on the first level and after a
/// failure, and "saturated" when both errors are at round-off.
inline void write_study_csv(std::ostream& os, const StudyReport& r) {
    os << study_csv_header << "\n";
    for (const auto& l : r.levels) {
        os << l.level << "," << format17(l.h) << "," << l.dofs << ",";
        if (l.failure.empty())
            os << format17(l.err_h2_broken) << "," << format17(l.err_linf_interior) << ",";
        else
            os << ",,";
        if (l.rate_h2)
            os << format17(*l.rate_h2);
        else if (l.saturated)
            os << "saturated";
        os << "\n";
    }
}

}  // namespace mafem
