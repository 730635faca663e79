// Runs the twelve acceptance criteria and prints one PASS/FAIL line each.
// Exit status is 0 when every failure is a documented known one.

#include "mafem/harness.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>

using namespace mafem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Criterion 7 asks for (N/2) sin(2 pi / N), the inscribed polygon; the cone's
// cell gradients have length 1 / cos(pi / N), so the atom is N tan(pi / N).
const std::set<int> known_failures{7};

std::shared_ptr<const FeSpace> square_space(int level, int k) {
    return std::make_shared<const FeSpace>(level_mesh(unit_square(), level), k);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

const ScalarField one = [](const Point&) { return 1.0; };
const ScalarField zero = [](const Point&) { return 0.0; };

double sup_diff(const FeFunction& a, const FeFunction& b) { return (a.coeffs() - b.coeffs()).lpNorm<Eigen::Infinity>(); }

double interior_sup_error(const FeFunction& u, const SmoothFunction& exact, const std::vector<Point>& pts) {
    double e = 0;
    for (const auto& x : pts) e = std::max(e, std::abs(u(x) - exact.value(x)));
    return e;
}

StudyReport smooth_study() {
    ProblemSpec p = catalogue("P-SMOOTH");
    p.k = 2;
    p.first_level = 2;  // h = 1/4 ... 1/32
    p.levels = 4;
    return run_convergence_study(p);
}

Outcome rate_h2(const StudyReport& r, double seconds) {
    const double rate = r.least_squares_rate_h2.value_or(0.0);
    return {r.complete && rate >= 0.85 && seconds < 120.0, "least-squares rate " + fmt(rate) + ", study took " + fmt(seconds) + " s"};
}

Outcome interior_uniform(const StudyReport& r) {
    bool dec = r.complete;
    std::string seq;
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        seq += (i ? " " : "") + fmt(r.levels[i].err_linf_interior);
        if (i > 0 && !(r.levels[i].err_linf_interior < r.levels[i - 1].err_linf_interior)) dec = false;
    }
    const double last = r.levels.empty() ? 1.0 : r.levels.back().err_linf_interior;
    return {dec && last <= 1e-3, "sup errors on [0.2,0.8]^2: " + seq};
}

Outcome jacobian_exactness() {
    const Mesh two({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {Cell{0, 1, 2}, Cell{0, 2, 3}}, {{0, 1, 0}, {1, 2, 1}, {2, 3, 2}, {3, 0, 3}});
    std::vector<Mesh> meshes{two, level_mesh(unit_square(), 0), level_mesh(unit_square(), 1), level_mesh(unit_square(), 2)};
    const ScalarField f = [](const Point& x) { return 1.0 + x.x() * x.y(); };
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> d(-1, 1);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
        const int k = 2 + t % 2;
        auto s = std::make_shared<const FeSpace>(meshes[static_cast<std::size_t>(t / 2 % 4)], k);
        FeFunction u = interpolate(s, [](const Point& x) { return 0.5 * x.squaredNorm(); });
        for (Eigen::Index i = 0; i < u.coeffs().size(); ++i) u.coeffs()(i) += 0.3 * d(rng);
        const SparseMatrix J = jacobian(u, Formulation::Stabilized);
        const auto& idx = s->interior_dofs();
        const double step = 1e-6 * (1 + u.coeffs().lpNorm<Eigen::Infinity>());
        Eigen::MatrixXd fd(idx.size(), idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            FeFunction p = u, m = u;
            p.coeffs()(idx[j]) += step;
            m.coeffs()(idx[j]) -= step;
            fd.col(static_cast<Eigen::Index>(j)) =
                (residual(p, f, Formulation::Stabilized) - residual(m, f, Formulation::Stabilized)) / (2 * step);
        }
        const Eigen::MatrixXd dense(J);
        worst = std::max(worst, (dense - fd).lpNorm<Eigen::Infinity>() / dense.lpNorm<Eigen::Infinity>());
    }
    return {worst <= 1e-6, "worst relative discrepancy " + fmt(worst) + " over 20 functions"};
}

Outcome newton_locality() {
    const ProblemSpec p = catalogue("P-SMOOTH");
    auto s = square_space(3, 2);
    const auto [u, rep] = newton_solve(s, p.f, p.g, std::nullopt);
    const double lam = analyze(u).global_min_lambda;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> d(-1, 1);
    int ok = 0;
    double worst = 0;
    for (int t = 0; t < 10; ++t) {
        FeFunction delta(s);
        for (int i : s->interior_dofs()) delta.coeffs()(i) = d(rng);
        // cellwise Hessians are linear in t, so |D^2 delta| <= lam / 2 keeps lambda_1 >= lam / 2 on the segment
        delta.coeffs() *= 0.5 * lam / broken_seminorm(delta, 2, Lp::Linf);
        bool convex = true;
        for (double a : {0.25, 0.5, 0.75, 1.0}) {
            FeFunction w = u;
            w.coeffs() += a * delta.coeffs();
            convex = convex && analyze(w).global_min_lambda > 0.0;
        }
        FeFunction start = u;
        start.coeffs() += delta.coeffs();
        try {
            const auto [v, rv] = newton_solve(s, p.f, p.g, start);
            const double diff = sup_diff(u, v);
            worst = std::max(worst, diff);
            if (convex && diff <= 1e-8) ++ok;
        } catch (const SolverError&) {
        }
    }
    return {ok == 10, std::to_string(ok) + "/10 reconverged, worst sup difference " + fmt(worst)};
}

Outcome cofactor_identity() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-1, 1);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        auto s = square_space(t % 3, 2 + t % 3);
        FeFunction u(s), w(s);
        for (Eigen::Index i = 0; i < u.coeffs().size(); ++i) {
            u.coeffs()(i) = d(rng);
            w.coeffs()(i) = d(rng);
        }
        // the tolerance is absolute: compare at unit Hessian size
        u.coeffs() /= broken_seminorm(u, 2, Lp::Linf);
        w.coeffs() /= broken_seminorm(w, 2, Lp::Linf);
        worst = std::max(worst, linearized_operator_check(u, w));
    }
    return {worst <= 1e-12, "worst pointwise discrepancy " + fmt(worst) + " over 100 unit-size pairs"};
}

Outcome strictify_shift() {
    const ProblemSpec p = catalogue("P-SMOOTH");
    const FeFunction u = interpolate(square_space(3, 2), p.exact->value);
    const double base = analyze(u).global_min_lambda;
    double worst = 0;
    for (double eps : {1e-3, 1e-6, 1e-9}) {
        const double shifted = analyze(strictify(u, eps, Point(0.4, 0.6))).global_min_lambda;
        worst = std::max(worst, std::abs(shifted - base - 2 * eps));
    }
    return {worst <= 1e-12, "worst |shift - 2 eps| " + fmt(worst)};
}

Outcome fan_atom() {
    bool match = true, monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    std::string detail;
    for (int n : {8, 16, 32}) {
        std::vector<Point> v{Point::Zero()};
        std::vector<Cell> cells;
        std::vector<BoundaryEdge> be;
        for (int i = 0; i < n; ++i) {
            const double t = 2 * std::numbers::pi * i / n;
            v.emplace_back(std::cos(t), std::sin(t));
            cells.push_back({0, 1 + i, 1 + (i + 1) % n});
            be.push_back({1 + i, 1 + (i + 1) % n, i});
        }
        auto s = std::make_shared<const FeSpace>(Mesh(v, cells, be), 1);
        const double atom = subdifferential_p1(interpolate(s, [](const Point& x) { return x.norm(); }), 0).area;
        const double stated = 0.5 * n * std::sin(2 * std::numbers::pi / n);
        const double circumscribed = n * std::tan(std::numbers::pi / n);
        match = match && std::abs(atom - stated) <= 1e-10;
        monotone = monotone && std::abs(atom - std::numbers::pi) < std::abs(prev - std::numbers::pi);
        prev = atom;
        detail += " N=" + std::to_string(n) + ": atom " + fmt(atom) + " vs stated " + fmt(stated) + " (N tan(pi/N) off by " +
                  fmt(std::abs(atom - circumscribed)) + ")";
    }
    return {match && monotone, "monotone toward pi: " + std::string(monotone ? "yes" : "no") + ";" + detail};
}

Outcome partial_measure() {
    const FeFunction v = interpolate(square_space(2, 2), [](const Point& x) { return 0.5 * x.squaredNorm(); });
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(0, 1);
    double worst = 0;
    for (int t = 0; t < 5; ++t) {
        const double side = 0.05 + 0.5 * d(rng);
        const double x0 = (1 - side) * d(rng), y0 = (1 - side) * d(rng);
        worst = std::max(worst, std::abs(partial_ma_measure(v, box(x0, y0, x0 + side, y0 + side)) - side * side));
    }
    return {worst <= 1e-10, "worst |M(E) - |E|| " + fmt(worst) + " over 5 sub-squares"};
}

Outcome weak_convergence() {
    const ProblemSpec p = catalogue("P-SMOOTH");
    std::vector<FeFunction> seq;
    for (int level = 1; level <= 4; ++level) seq.push_back(interpolate(square_space(level, 2), p.exact->value));
    bool monotone = true;
    for (const Bump& b : default_bumps(p)) {
        const auto r = weak_convergence_residual(seq, p.f, b);
        for (std::size_t j = 1; j < r.size(); ++j) monotone = monotone && r[j] < r[j - 1];
    }
    auto s = square_space(2, 2);
    const FeFunction limit = interpolate(s, [](const Point& x) { return 0.5 * x.squaredNorm(); });
    double worst = 0;
    for (const Bump& b : default_bumps(p)) {
        const double mass = integrate_density(*s, one, b);
        std::vector<FeFunction> st;
        const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
        for (double e : eps) st.push_back(strictify(limit, e, Point(0.5, 0.5)));
        const auto r = weak_convergence_residual(st, limit, b);
        for (std::size_t j = 0; j < eps.size(); ++j) worst = std::max(worst, std::abs(r[j] - (4 * eps[j] + 4 * eps[j] * eps[j]) * mass));
    }
    return {monotone && worst <= 1e-9, std::string("refinement residuals monotone: ") + (monotone ? "yes" : "no") +
                                           ", closed-form mismatch " + fmt(worst)};
}

// continuation at h = 1/32, recording the interior error after every stage
std::pair<std::vector<double>, FeFunction> continuation_errors(const ProblemSpec& p) {
    auto s = square_space(5, 2);
    const auto pts = grid_samples(measurement_compact(p), 40);
    std::vector<double> errs;
    std::optional<FeFunction> u;
    SolverConfig cfg;
    cfg.check_data = false;
    for (double eps : p.regularization.epsilon_schedule) {
        auto [v, rep] = newton_solve(s, shift(p.f, eps), p.g, u, cfg);
        errs.push_back(interior_sup_error(v, *p.exact, pts));
        u = std::move(v);
    }
    return {errs, *u};
}

Outcome degenerate_pathway() {
    const ProblemSpec p = catalogue("P-DEGENERATE");
    try {
        const auto [errs, u] = continuation_errors(p);
        bool dec = true;
        std::string seq;
        for (std::size_t i = 0; i < errs.size(); ++i) {
            seq += (i ? " " : "") + fmt(errs[i]);
            if (i > 0 && !(errs[i] < errs[i - 1])) dec = false;
        }
        return {dec && errs.back() <= 5e-2, "interior sup errors across the schedule: " + seq};
    } catch (const SolverError& e) {
        return {false, e.what()};
    }
}

Outcome envelope_consistency() {
    const std::vector<ScalarField> traces{
        [](const Point& x) { return x.squaredNorm(); },
        [](const Point& x) { return std::exp(x.x() - x.y()); },
        [](const Point& x) { return 3 * x.x() - x.y() + 1; },
        [](const Point& x) { return std::pow(x.x() - 0.2, 4) + std::pow(x.y() - 0.7, 2); },
        [](const Point& x) { return std::hypot(x.x() - 0.3, x.y() + 0.5); },
    };
    double trace_err = 0;
    for (const auto& b : traces) {
        const BoundaryEnvelope env = convex_envelope_boundary(unit_square(), b, 65);
        for (const auto& s : env.samples()) trace_err = std::max(trace_err, std::abs(s.envelope - s.b));
    }

    const ProblemSpec p = catalogue("P-ENVELOPE");
    const BoundaryEnvelope env = convex_envelope_boundary(p.polygon, p.g, 9);
    double fe_err = std::numeric_limits<double>::infinity();
    try {
        const auto [errs, u] = continuation_errors(p);
        fe_err = 0;
        for (const auto& x : grid_samples(measurement_compact(p), 20)) fe_err = std::max(fe_err, std::abs(u(x) - convex_envelope_at(env, x)));
    } catch (const SolverError&) {
    }
    return {trace_err <= 1e-8 && fe_err <= 5e-2, "convex traces reproduced to " + fmt(trace_err) + ", FE vs hull oracle " + fmt(fe_err)};
}

Outcome aleksandrov() {
    const ProblemSpec p = catalogue("P-SMOOTH");
    auto s = square_space(3, 2);
    const auto [u, ru] = newton_solve(s, p.f, p.g, std::nullopt);
    const auto [z, rz] = newton_solve(s, one, zero, std::nullopt);
    const double su = aleksandrov_bound(u, p.f).slack, sz = aleksandrov_bound(z, one).slack;
    FeFunction z2 = z;
    z2.coeffs() *= 2.0;
    const AleksandrovReport a = aleksandrov_bound(z, one);
    const AleksandrovReport b = aleksandrov_bound(z2, [](const Point&) { return 4.0; });
    const bool homogeneous = b.slack == 4.0 * a.slack;
    return {su <= 0 && sz <= 0 && homogeneous,
            "slack P-SMOOTH " + fmt(su) + ", f=1 g=0 " + fmt(sz) + ", homogeneity exact: " + (homogeneous ? "yes" : "no")};
}

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const StudyReport study = smooth_study();
    const double seconds = std::chrono::duration<double>(clock::now() - t0).count();

    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, [&] { return rate_h2(study, seconds); }},
        {2, [&] { return interior_uniform(study); }},
        {3, jacobian_exactness},
        {4, newton_locality},
        {5, cofactor_identity},
        {6, strictify_shift},
        {7, fan_atom},
        {8, partial_measure},
        {9, weak_convergence},
        {10, degenerate_pathway},
        {11, envelope_consistency},
        {12, aleksandrov},
    };
    int unexpected = 0;
    for (const auto& [id, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail << ")";
        if (!o.pass && known_failures.count(id)) std::cout << " [known]";
        std::cout << std::endl;
        if (!o.pass && !known_failures.count(id)) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
