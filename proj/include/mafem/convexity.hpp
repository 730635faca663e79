#pragma once

// Piecewise convexity diagnostics for FE functions.

#include "mafem/fespace.hpp"

namespace mafem {

struct ConvexityReport {
    std::vector<double> cell_min_lambda;  ///< per cell, min over samples of lambda_1(D^2 u_h)
    std::vector<double> cell_min_det;
    double global_min_lambda = 0.0;
    double global_min_det = 0.0;
    double tol = 1e-9;
    int sample_order = 0;
    bool convex = false;           ///< global_min_lambda >= -tol
    bool strictly_convex = false;  ///< global_min_lambda > tol (hence det > 0)
};

/// Samples the cellwise Hessian at the points of a rule of the given order.
/// For k = 2 the Hessian is constant per cell and the check is exact.
inline ConvexityReport analyze(const FeFunction& u, int sample_order = -1, double tol = 1e-9) {
    const FeSpace& space = u.space();
    const int min_order = std::max(2 * space.degree() - 4, 0);
    if (sample_order < 0) sample_order = std::max(min_order, 2);
    if (sample_order < min_order) throw FeError("analyze: sample order must be at least 2k - 4");
    const Quadrature q = triangle_rule(sample_order);
    const auto ref = space.reference(q);
    ConvexityReport r;
    r.tol = tol;
    r.sample_order = sample_order;
    r.cell_min_lambda.assign(space.mesh().num_cells(), std::numeric_limits<double>::infinity());
    r.cell_min_det.assign(space.mesh().num_cells(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const auto uc = u.local_coeffs(c);
        for (const auto& rj : ref) {
            const Mat2 h = FeFunction::combine(space.basis(c, rj), uc).hess;
            r.cell_min_lambda[c] = std::min(r.cell_min_lambda[c], symmetric_eigenvalues(h).first);
            r.cell_min_det[c] = std::min(r.cell_min_det[c], h.determinant());
        }
    }
    r.global_min_lambda = *std::min_element(r.cell_min_lambda.begin(), r.cell_min_lambda.end());
    r.global_min_det = *std::min_element(r.cell_min_det.begin(), r.cell_min_det.end());
    r.convex = r.global_min_lambda >= -tol;
    r.strictly_convex = r.global_min_lambda > tol;
    return r;
}

/// u_h + Pi_h(eps |x - x0|^2); exact for k >= 2, so every cellwise Hessian
/// moves by 2 eps I.
inline FeFunction strictify(const FeFunction& u, double eps, const Point& x0) {
    if (u.space().degree() < 2) throw FeError("strictify: needs degree >= 2 to represent the quadratic");
    FeFunction out = u;
    if (eps == 0.0) return out;
    for (int d = 0; d < u.space().num_dofs(); ++d)
        out.coeffs()(d) += eps * (u.space().dof_coords()[static_cast<std::size_t>(d)] - x0).squaredNorm();
    return out;
}

/// Default strictification size, close to machine precision relative to u.
inline double default_strictify_epsilon(const FeFunction& u) {
    return 1e-12 * std::max(1.0, u.coeffs().lpNorm<Eigen::Infinity>());
}

struct BubbleCheck {
    std::vector<double> det_moment;  ///< int_K det(D^2 u_h) b_K
    std::vector<double> f_moment;    ///< int_K f b_K
    std::vector<bool> flagged;       ///< det_moment <= 0 (up to 1e-12 |K|)
};

/// Tests det D^2 u_h against the cubic bubble b_K = 60 l0 l1 l2 (unit
/// average on K) on every cell.
inline BubbleCheck bubble_positivity_check(const FeFunction& u, const ScalarField& f) {
    const FeSpace& space = u.space();
    const Quadrature q = triangle_rule(2 * space.degree() + 2);
    const auto ref = space.reference(q);
    BubbleCheck out;
    const std::size_t nc = space.mesh().num_cells();
    out.det_moment.assign(nc, 0.0);
    out.f_moment.assign(nc, 0.0);
    out.flagged.assign(nc, false);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto uc = u.local_coeffs(c);
        const double area = space.mesh().cell_area(c);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const auto& l = q.points[i];
            const double bubble = 60.0 * l[0] * l[1] * l[2];
            const double w = q.weights[i] * area * bubble;
            out.det_moment[c] += w * FeFunction::combine(space.basis(c, ref[i]), uc).hess.determinant();
            out.f_moment[c] += w * f(space.map_to_cell(c, l));
        }
        // zero up to round-off counts as degenerate
        out.flagged[c] = out.det_moment[c] <= 1e-12 * area;
    }
    return out;
}

}  // namespace mafem
