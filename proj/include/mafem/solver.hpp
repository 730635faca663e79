#pragma once

// Damped Newton, pseudo-transient time marching and continuation.

#include "mafem/assembly.hpp"
#include "mafem/convexity.hpp"
#include "mafem/regularize.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <chrono>

namespace mafem {

enum class ContinuationKind { Shift, Truncate };

/// LineSearch is backtracking Newton only. Auto falls back to pseudo-transient
/// continuation from the initial guess when backtracking fails.
enum class Globalization { LineSearch, PseudoTransient, Auto };

struct SolverConfig {
    double tol_residual = 1e-10;  ///< on the sup norm of the residual
    int max_iters = 50;
    double min_step = 1.0 / (1 << 20);
    double armijo = 1e-4;
    double nu = 1.0;           ///< pseudo-time parameter
    double tol_step = 1e-8;    ///< time march: sup norm of iterate difference
    int max_time_steps = 5000;
    double tol_convex = 1e-8;  ///< time march safeguard threshold
    bool convexity_safeguard = true;
    bool check_data = true;    ///< sample f > 0 before Newton
    Formulation formulation = Formulation::Stabilized;
    int quadrature_order = -1;
    Globalization globalization = Globalization::Auto;
    double ptc_dt0 = 0.1;       ///< initial pseudo time step
    int ptc_max_iters = 400;
    ContinuationKind continuation_kind = ContinuationKind::Shift;
    std::vector<double> continuation_schedule;  ///< decreasing eps, or increasing M

    void validate() const {
        if (!(tol_residual > 0.0)) throw std::invalid_argument("solver config: tol_residual must be positive");
        if (!(nu > 0.0)) throw std::invalid_argument("solver config: nu must be positive");
        if (max_iters < 0 || max_time_steps < 0) throw std::invalid_argument("solver config: iteration caps must be nonnegative");
    }
};

struct StageRecord {
    double parameter = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_residual = 0.0;
};

struct SolveReport {
    std::string method;
    std::vector<double> residual_history;  ///< sup norm of the residual per iterate
    std::vector<double> step_history;      ///< sup norm of the update per step
    std::vector<double> step_lengths;      ///< Newton damping factors
    int iterations = 0;
    bool converged = false;
    double min_lambda = 0.0;
    double wall_time = 0.0;
    int safeguard_count = 0;
    std::vector<StageRecord> stages;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, FeFunction last, SolveReport report)
        : std::runtime_error(what), last_iterate(std::move(last)), report(std::move(report)) {}
    FeFunction last_iterate;
    SolveReport report;
};

namespace detail {

inline double sup(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

class Timer {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void require_positive(const ScalarField& f, const FeSpace& space) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& p : space.dof_coords()) lo = std::min(lo, f(p));
    const Quadrature q = triangle_rule(2 * space.degree());
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c)
        for (const auto& b : q.points) lo = std::min(lo, f(space.map_to_cell(c, b)));
    if (!(lo > 0.0))
        throw std::invalid_argument("f must be positive on the domain (sampled minimum " + std::to_string(lo) +
                                    "); use shift or continuation for degenerate data");
}

}  // namespace detail

/// Discrete Poisson problem Delta u0 = 2 sqrt(f), u0 = g at boundary nodes,
/// i.e. int grad u0 . grad v = -int 2 sqrt(f) v for interior v.
inline FeFunction default_initial_guess(std::shared_ptr<const FeSpace> space, const ScalarField& f, const ScalarField& g) {
    const ScalarField source = [&f](const Point& x) {
        const double v = f(x);
        if (v < 0.0) throw std::invalid_argument("default_initial_guess: f must be nonnegative");
        return 2.0 * std::sqrt(v);
    };
    const auto [kii, kib] = split_interior(*space, assemble_stiffness(*space));
    const Eigen::VectorXd load = assemble_load(*space, source);
    const BoundaryValues bv = apply_boundary(*space, g);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(space->interior_dofs().size()));
    for (std::size_t i = 0; i < space->interior_dofs().size(); ++i) rhs(static_cast<Eigen::Index>(i)) = -load(space->interior_dofs()[i]);
    rhs -= kib * bv.values;
    FeFunction u0(space);
    impose(u0, bv);
    if (rhs.size() == 0) return u0;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(kii);
    if (ldlt.info() != Eigen::Success) throw std::logic_error("default_initial_guess: singular Laplacian");
    set_interior(u0, ldlt.solve(rhs));
    return u0;
}

namespace detail {

inline const char* advice_msg() { return "strictify the iterate or use continuation on the data"; }
inline std::string singular_msg() { return std::string("singular Jacobian; ") + advice_msg(); }

/// Backtracking Newton on ||R||_2 with Armijo factor cfg.armijo. Returns an
/// empty string on convergence, otherwise the failure reason.
inline std::string newton_line_search(FeFunction& u, const ScalarField& f, const SolverConfig& cfg, SolveReport& rep) {
    Eigen::VectorXd r = residual(u, f, cfg.formulation, cfg.quadrature_order);
    rep.residual_history.push_back(sup(r));
    Eigen::SparseLU<SparseMatrix> lu;
    int iters = 0;
    while (rep.residual_history.back() > cfg.tol_residual) {
        if (iters >= cfg.max_iters) return "newton: no convergence within " + std::to_string(cfg.max_iters) + " iterations";
        lu.compute(jacobian(u, cfg.formulation, cfg.quadrature_order));
        if (lu.info() != Eigen::Success) return std::string("newton: ") + singular_msg();
        const Eigen::VectorXd delta = lu.solve(-r);
        if (lu.info() != Eigen::Success || !delta.allFinite()) return std::string("newton: ") + singular_msg();

        const Eigen::VectorXd x = interior_part(u);
        const double r2 = r.norm();
        double alpha = 1.0;
        FeFunction trial = u;
        Eigen::VectorXd r_trial;
        while (true) {
            set_interior(trial, x + alpha * delta);
            r_trial = residual(trial, f, cfg.formulation, cfg.quadrature_order);
            if (r_trial.allFinite() && r_trial.norm() <= (1.0 - cfg.armijo * alpha) * r2) break;
            alpha *= 0.5;
            if (alpha < cfg.min_step) return std::string("newton: line search stagnation (step below 2^-20); ") + advice_msg();
        }
        u = std::move(trial);
        r = std::move(r_trial);
        ++iters;
        ++rep.iterations;
        rep.step_lengths.push_back(alpha);
        rep.step_history.push_back(alpha * sup(delta));
        rep.residual_history.push_back(sup(r));
    }
    return {};
}

/// Pseudo-transient continuation: (K / dt - J) delta = R, with dt grown by
/// the ratio of successive residual norms, so the iteration moves from the
/// time march towards Newton's method as the residual drops.
inline std::string newton_pseudo_transient(FeFunction& u, const ScalarField& f, const SolverConfig& cfg, SolveReport& rep) {
    const SparseMatrix kii = split_interior(u.space(), assemble_stiffness(u.space())).first;
    Eigen::VectorXd r = residual(u, f, cfg.formulation, cfg.quadrature_order);
    rep.residual_history.push_back(sup(r));
    Eigen::SparseLU<SparseMatrix> lu;
    double dt = cfg.ptc_dt0;
    int iters = 0;
    while (rep.residual_history.back() > cfg.tol_residual) {
        if (iters >= cfg.ptc_max_iters) return "pseudo-transient: no convergence within " + std::to_string(cfg.ptc_max_iters) + " iterations";
        const SparseMatrix a = SparseMatrix(kii / dt) - jacobian(u, cfg.formulation, cfg.quadrature_order);
        lu.compute(a);
        const Eigen::VectorXd delta = lu.info() == Eigen::Success ? Eigen::VectorXd(lu.solve(r)) : Eigen::VectorXd();
        FeFunction trial = u;
        Eigen::VectorXd r_trial;
        if (delta.size() == r.size() && delta.allFinite()) {
            set_interior(trial, interior_part(u) + delta);
            r_trial = residual(trial, f, cfg.formulation, cfg.quadrature_order);
        }
        ++iters;
        if (r_trial.size() != r.size() || !r_trial.allFinite()) {
            dt *= 0.1;
            if (dt < 1e-12) return std::string("pseudo-transient: ") + singular_msg();
            continue;
        }
        dt = std::min(dt * r.norm() / std::max(r_trial.norm(), 1e-300), 1e15);
        u = std::move(trial);
        r = std::move(r_trial);
        ++rep.iterations;
        rep.step_lengths.push_back(1.0);
        rep.step_history.push_back(sup(delta));
        rep.residual_history.push_back(sup(r));
    }
    return {};
}

}  // namespace detail

/// Newton's method on the interior coefficients. Globalization per
/// cfg.globalization; boundary dofs hold g at the Lagrange nodes throughout.
inline std::pair<FeFunction, SolveReport> newton_solve(std::shared_ptr<const FeSpace> space, const ScalarField& f,
                                                       const ScalarField& g, const std::optional<FeFunction>& u0,
                                                       const SolverConfig& cfg = {}) {
    cfg.validate();
    detail::Timer timer;
    if (cfg.check_data) detail::require_positive(f, *space);
    const BoundaryValues bv = apply_boundary(*space, g);
    FeFunction start = u0 ? *u0 : default_initial_guess(space, f, g);
    if (&start.space() != space.get()) throw std::invalid_argument("newton_solve: initial guess lives on another space");
    impose(start, bv);

    SolveReport rep;
    FeFunction u = start;
    std::string err;
    if (cfg.globalization != Globalization::PseudoTransient) {
        rep.method = "newton";
        err = detail::newton_line_search(u, f, cfg, rep);
    }
    if (cfg.globalization == Globalization::PseudoTransient || (!err.empty() && cfg.globalization == Globalization::Auto)) {
        rep.method = rep.method.empty() ? "pseudo_transient" : "newton+pseudo_transient";
        // restart from the initial guess: the failed iterate is usually worse
        rep.residual_history.clear();
        rep.step_history.clear();
        rep.step_lengths.clear();
        rep.iterations = 0;
        u = start;
        const std::string err2 = detail::newton_pseudo_transient(u, f, cfg, rep);
        err = err2.empty() ? std::string() : err + "; " + err2;
    }
    rep.wall_time = timer.seconds();
    if (!err.empty()) throw SolverError(err, u, rep);
    rep.converged = true;
    rep.min_lambda = analyze(u).global_min_lambda;
    rep.wall_time = timer.seconds();
    return {std::move(u), std::move(rep)};
}

/// Pseudo-transient iteration nu K (u^{n+1} - u^n) = R(u^n) on interior dofs,
/// with K the stiffness matrix and R the residual. Where D^2 u is close
/// to the identity this is Newton's method with the Jacobian frozen at -K/nu.
inline std::pair<FeFunction, SolveReport> time_march(std::shared_ptr<const FeSpace> space, const ScalarField& f,
                                                     const ScalarField& g, const std::optional<FeFunction>& u0,
                                                     const SolverConfig& cfg = {}) {
    cfg.validate();
    detail::Timer timer;
    if (cfg.check_data) detail::require_positive(f, *space);
    const BoundaryValues bv = apply_boundary(*space, g);
    FeFunction u = u0 ? *u0 : default_initial_guess(space, f, g);
    impose(u, bv);

    SolveReport rep;
    rep.method = "time_march";
    const SparseMatrix kii = split_interior(*space, assemble_stiffness(*space)).first;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(kii);
    if (ldlt.info() != Eigen::Success) throw std::logic_error("time_march: singular stiffness matrix");
    // eps * psi with Delta psi = 4, psi = 0 on the boundary: strictify minus
    // the discrete harmonic extension of its trace. It raises the Hessian
    // trace by 4 eps like strictify but leaves the boundary data alone.
    Eigen::VectorXd psi;
    if (cfg.convexity_safeguard && !space->interior_dofs().empty()) {
        const Eigen::VectorXd four = assemble_load(*space, [](const Point&) { return 4.0; });
        Eigen::VectorXd b(static_cast<Eigen::Index>(space->interior_dofs().size()));
        for (std::size_t i = 0; i < space->interior_dofs().size(); ++i) b(static_cast<Eigen::Index>(i)) = -four(space->interior_dofs()[i]);
        psi = ldlt.solve(b);
    }

    while (true) {
        const Eigen::VectorXd r = residual(u, f, cfg.formulation, cfg.quadrature_order);
        rep.residual_history.push_back(detail::sup(r));
        if (rep.iterations >= cfg.max_time_steps) {
            rep.wall_time = timer.seconds();
            throw SolverError("time_march: no convergence within " + std::to_string(cfg.max_time_steps) + " steps", u, rep);
        }
        const Eigen::VectorXd delta = r.size() ? Eigen::VectorXd(ldlt.solve(r) / cfg.nu) : Eigen::VectorXd();
        set_interior(u, interior_part(u) + delta);
        ++rep.iterations;
        double change = detail::sup(delta);
        if (cfg.convexity_safeguard && psi.size()) {
            const double lam = analyze(u).global_min_lambda;
            if (lam < -cfg.tol_convex) {
                const Eigen::VectorXd lift = -lam * psi;
                set_interior(u, interior_part(u) + lift);
                change = std::max(change, detail::sup(lift));
                ++rep.safeguard_count;
            }
        }
        rep.step_history.push_back(change);
        if (change <= cfg.tol_step) break;
    }
    rep.residual_history.push_back(detail::sup(residual(u, f, cfg.formulation, cfg.quadrature_order)));
    rep.converged = true;
    rep.min_lambda = analyze(u).global_min_lambda;
    rep.wall_time = timer.seconds();
    return {std::move(u), std::move(rep)};
}

/// Solves the problems with data shift(f, eps_j) (or truncate(f, M_j)) in
/// schedule order, warm-starting each Newton solve from the previous one.
/// A failure after the first stage returns the last converged iterate with
/// converged = false.
inline std::pair<FeFunction, SolveReport> continuation_solve(std::shared_ptr<const FeSpace> space, const ScalarField& f,
                                                             const ScalarField& g, const SolverConfig& cfg) {
    cfg.validate();
    detail::Timer timer;
    if (cfg.continuation_schedule.empty()) throw std::invalid_argument("continuation: empty schedule");
    for (const auto& p : space->dof_coords())
        if (f(p) < 0.0) throw std::invalid_argument("continuation: f must be nonnegative");

    SolveReport rep;
    rep.method = "continuation";
    std::optional<FeFunction> u;
    SolverConfig stage_cfg = cfg;
    stage_cfg.check_data = false;
    for (std::size_t j = 0; j < cfg.continuation_schedule.size(); ++j) {
        const double p = cfg.continuation_schedule[j];
        ScalarField fj;
        if (cfg.continuation_kind == ContinuationKind::Shift)
            fj = p > 0.0 ? shift(f, p) : f;
        else
            fj = truncate(f, p);
        StageRecord st;
        st.parameter = p;
        try {
            auto [uj, rj] = newton_solve(space, fj, g, u, stage_cfg);
            st.iterations = rj.iterations;
            st.converged = true;
            st.final_residual = rj.residual_history.back();
            rep.iterations += rj.iterations;
            rep.residual_history.insert(rep.residual_history.end(), rj.residual_history.begin(), rj.residual_history.end());
            u = std::move(uj);
            rep.stages.push_back(st);
        } catch (const SolverError& e) {
            st.iterations = e.report.iterations;
            st.final_residual = e.report.residual_history.empty() ? 0.0 : e.report.residual_history.back();
            rep.stages.push_back(st);
            if (!u) {
                rep.wall_time = timer.seconds();
                throw SolverError(std::string("continuation: first stage failed: ") + e.what(), e.last_iterate, rep);
            }
            rep.converged = false;
            rep.min_lambda = analyze(*u).global_min_lambda;
            rep.wall_time = timer.seconds();
            return {std::move(*u), std::move(rep)};
        }
    }
    rep.converged = true;
    rep.min_lambda = analyze(*u).global_min_lambda;
    rep.wall_time = timer.seconds();
    return {std::move(*u), std::move(rep)};
}

}  // namespace mafem
