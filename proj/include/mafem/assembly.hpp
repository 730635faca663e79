#pragma once

// Residual and Jacobian of the discrete Monge-Ampere problem
//
//   sum_K int_K (det D^2 u_h - f) v_h dx = 0   for all interior test functions v_h,
//
// with D^2 u_h the cellwise Hessian and boundary dofs eliminated.

#include "mafem/fespace.hpp"

#include <Eigen/Sparse>

namespace mafem {

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// How the determinant is tested against v_h.
///
/// Cellwise is the plain sum of cell integrals above. Stabilized subtracts
/// the interior-edge term
///
///   sum_e int_e d_tt u_h [d_n u_h] v_h ds,
///
/// with d_tt the (single-valued) tangential second derivative and [d_n u_h]
/// the jump of the normal derivative. The term vanishes on C1 functions, so
/// both forms agree on smooth solutions, but only the stabilized one has a
/// nonsingular Jacobian for C0 elements: its linearization at a smooth u is
/// -int cof(D^2 u) grad w . grad v, while the cellwise Jacobian has rank at
/// most (number of cells) * dim P_{2k-4} when D^2 u_h is cellwise constant.
enum class Formulation { Cellwise, Stabilized };

inline const char* to_string(Formulation f) { return f == Formulation::Cellwise ? "cellwise" : "stabilized"; }

inline Formulation formulation_from_string(const std::string& s) {
    if (s == "cellwise") return Formulation::Cellwise;
    if (s == "stabilized") return Formulation::Stabilized;
    throw std::invalid_argument("unknown formulation '" + s + "'");
}

inline int default_quadrature_order(const FeSpace& space) { return 2 * space.degree(); }

/// Boundary dofs and their prescribed values g(node).
struct BoundaryValues {
    std::vector<int> dofs;
    Eigen::VectorXd values;
};

inline BoundaryValues apply_boundary(const FeSpace& space, const ScalarField& g) {
    BoundaryValues bv;
    bv.dofs = space.boundary_dofs();
    bv.values.resize(static_cast<Eigen::Index>(bv.dofs.size()));
    for (std::size_t i = 0; i < bv.dofs.size(); ++i) {
        const double v = g(space.dof_coords()[static_cast<std::size_t>(bv.dofs[i])]);
        if (!std::isfinite(v)) throw AssemblyError("apply_boundary: non-finite boundary value at dof " + std::to_string(bv.dofs[i]));
        bv.values(static_cast<Eigen::Index>(i)) = v;
    }
    return bv;
}

inline void impose(FeFunction& u, const BoundaryValues& bv) {
    for (std::size_t i = 0; i < bv.dofs.size(); ++i) u.coeffs()(bv.dofs[i]) = bv.values(static_cast<Eigen::Index>(i));
}

inline Eigen::VectorXd interior_part(const FeFunction& u) {
    const auto& idx = u.space().interior_dofs();
    Eigen::VectorXd x(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) x(static_cast<Eigen::Index>(i)) = u.coeffs()(idx[i]);
    return x;
}

inline void set_interior(FeFunction& u, const Eigen::VectorXd& x) {
    const auto& idx = u.space().interior_dofs();
    for (std::size_t i = 0; i < idx.size(); ++i) u.coeffs()(idx[i]) = x(static_cast<Eigen::Index>(i));
}

struct System {
    Eigen::VectorXd residual;
    SparseMatrix jacobian;
};

namespace detail {

template <bool WithResidual, bool WithJacobian>
System assemble(const FeFunction& u, const ScalarField* f, Formulation form, int order) {
    const FeSpace& space = u.space();
    if (order < 0) order = default_quadrature_order(space);
    const Quadrature q = triangle_rule(order);
    const auto ref = space.reference(q);
    const auto n = static_cast<Eigen::Index>(space.interior_dofs().size());
    System out;
    if constexpr (WithResidual) out.residual = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trip;
    const int nloc = space.dofs_per_cell();
    if constexpr (WithJacobian) trip.reserve(space.mesh().num_cells() * static_cast<std::size_t>(nloc * nloc));

    Eigen::VectorXd r_loc(nloc);
    Eigen::MatrixXd j_loc(nloc, nloc);
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const auto uc = u.local_coeffs(c);
        const double area = space.mesh().cell_area(c);
        r_loc.setZero();
        j_loc.setZero();
        for (std::size_t iq = 0; iq < q.size(); ++iq) {
            const BasisJet b = space.basis(c, ref[iq]);
            const Jet uj = FeFunction::combine(b, uc);
            const double w = q.weights[iq] * area;
            const Mat2 cof = cofactor(uj.hess);
            if constexpr (WithResidual) {
                const double fx = (*f)(space.map_to_cell(c, q.points[iq]));
                if (!std::isfinite(fx)) throw AssemblyError("residual: non-finite right-hand side at a quadrature point");
                r_loc += w * (uj.hess.determinant() - fx) * b.phi;
            }
            if constexpr (WithJacobian) {
                Eigen::VectorXd dj(nloc);
                for (int j = 0; j < nloc; ++j) dj(j) = frobenius(cof, b.hess[static_cast<std::size_t>(j)]);
                j_loc.noalias() += w * b.phi * dj.transpose();
            }
        }
        const auto& dofs = space.cell_dofs(c);
        for (int i = 0; i < nloc; ++i) {
            const int ri = space.interior_index(dofs[static_cast<std::size_t>(i)]);
            if (ri < 0) continue;
            if constexpr (WithResidual) out.residual(ri) += r_loc(i);
            if constexpr (WithJacobian)
                for (int j = 0; j < nloc; ++j) {
                    const int cj = space.interior_index(dofs[static_cast<std::size_t>(j)]);
                    if (cj >= 0) trip.emplace_back(ri, cj, j_loc(i, j));
                }
        }
    }
    if (form == Formulation::Stabilized) {
        const int k = space.degree();
        const LineRule g = gauss_legendre((3 * k) / 2 + 1);
        Eigen::VectorXd re(nloc);
        Eigen::MatrixXd je(nloc, 2 * nloc);
        for (const auto& e : space.interior_edges()) {
            const auto cp = static_cast<std::size_t>(e.plus), cm = static_cast<std::size_t>(e.minus);
            const auto up = u.local_coeffs(cp), um = u.local_coeffs(cm);
            const Point n_e = e.normal;
            const Point t_e(-n_e.y(), n_e.x());
            re.setZero();
            je.setZero();
            for (std::size_t iq = 0; iq < g.points.size(); ++iq) {
                const double s = g.points[iq];
                const BasisJet bp = space.basis(cp, space.edge_point(cp, e.a, e.b, s));
                const BasisJet bm = space.basis(cm, space.edge_point(cm, e.a, e.b, s));
                const Jet jp = FeFunction::combine(bp, up), jm = FeFunction::combine(bm, um);
                const double w = g.weights[iq] * e.length;
                const double dtt = 0.5 * (t_e.dot(jp.hess * t_e) + t_e.dot(jm.hess * t_e));
                const double jump = (jp.grad - jm.grad).dot(n_e);
                if constexpr (WithResidual) re -= w * dtt * jump * bp.phi;
                if constexpr (WithJacobian) {
                    Eigen::VectorXd dcol(2 * nloc);
                    for (int j = 0; j < nloc; ++j) {
                        const double dtt_p = 0.5 * t_e.dot(bp.hess[static_cast<std::size_t>(j)] * t_e);
                        const double dtt_m = 0.5 * t_e.dot(bm.hess[static_cast<std::size_t>(j)] * t_e);
                        dcol(j) = dtt_p * jump + dtt * bp.grad.row(j).dot(n_e);
                        dcol(nloc + j) = dtt_m * jump - dtt * bm.grad.row(j).dot(n_e);
                    }
                    je.noalias() -= w * bp.phi * dcol.transpose();
                }
            }
            const auto& dp = space.cell_dofs(cp);
            const auto& dm = space.cell_dofs(cm);
            for (int i = 0; i < nloc; ++i) {
                const int ri = space.interior_index(dp[static_cast<std::size_t>(i)]);
                if (ri < 0) continue;
                if constexpr (WithResidual) out.residual(ri) += re(i);
                if constexpr (WithJacobian)
                    for (int j = 0; j < 2 * nloc; ++j) {
                        const int gdof = j < nloc ? dp[static_cast<std::size_t>(j)] : dm[static_cast<std::size_t>(j - nloc)];
                        const int cj = space.interior_index(gdof);
                        if (cj >= 0) trip.emplace_back(ri, cj, je(i, j));
                    }
            }
        }
    }
    if constexpr (WithJacobian) {
        out.jacobian.resize(n, n);
        out.jacobian.setFromTriplets(trip.begin(), trip.end());
    }
    return out;
}

}  // namespace detail

/// Residual over interior dofs: entry i = sum_K int_K (det D^2 u_h - f) phi_i
/// (minus the edge term for the stabilized form).
inline Eigen::VectorXd residual(const FeFunction& u, const ScalarField& f, Formulation form = Formulation::Cellwise,
                                int order = -1) {
    return detail::assemble<true, false>(u, &f, form, order).residual;
}

/// Exact derivative of residual() with respect to the interior coefficients.
/// Cellwise entry (i, j) = sum_K int_K (cof D^2 u_h : D^2 phi_j) phi_i.
inline SparseMatrix jacobian(const FeFunction& u, Formulation form = Formulation::Cellwise, int order = -1) {
    return detail::assemble<false, true>(u, nullptr, form, order).jacobian;
}

inline System assemble_system(const FeFunction& u, const ScalarField& f, Formulation form = Formulation::Cellwise,
                              int order = -1) {
    return detail::assemble<true, true>(u, &f, form, order);
}

/// Full-dof stiffness matrix int grad phi_j . grad phi_i.
inline SparseMatrix assemble_stiffness(const FeSpace& space) {
    const Quadrature q = triangle_rule(2 * space.degree());
    const auto ref = space.reference(q);
    const int nloc = space.dofs_per_cell();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(space.mesh().num_cells() * static_cast<std::size_t>(nloc * nloc));
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        Eigen::MatrixXd k_loc = Eigen::MatrixXd::Zero(nloc, nloc);
        for (std::size_t iq = 0; iq < q.size(); ++iq) {
            const BasisJet b = space.basis(c, ref[iq]);
            k_loc.noalias() += q.weights[iq] * space.mesh().cell_area(c) * b.grad * b.grad.transpose();
        }
        const auto& dofs = space.cell_dofs(c);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) trip.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], k_loc(i, j));
    }
    SparseMatrix k(space.num_dofs(), space.num_dofs());
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

/// Full-dof load vector int s phi_i.
inline Eigen::VectorXd assemble_load(const FeSpace& space, const ScalarField& s, int order = -1) {
    if (order < 0) order = 2 * space.degree() + 2;
    const Quadrature q = triangle_rule(order);
    const auto ref = space.reference(q);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(space.num_dofs());
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const auto& dofs = space.cell_dofs(c);
        for (std::size_t iq = 0; iq < q.size(); ++iq) {
            const double v = s(space.map_to_cell(c, q.points[iq]));
            if (!std::isfinite(v)) throw AssemblyError("assemble_load: non-finite source value");
            const double w = q.weights[iq] * space.mesh().cell_area(c) * v;
            for (std::size_t i = 0; i < dofs.size(); ++i) out(dofs[i]) += w * ref[iq].phi(static_cast<Eigen::Index>(i));
        }
    }
    return out;
}

/// Restricts a full-dof matrix to (interior rows, interior cols) and
/// (interior rows, boundary cols).
inline std::pair<SparseMatrix, SparseMatrix> split_interior(const FeSpace& space, const SparseMatrix& full) {
    const auto ni = static_cast<Eigen::Index>(space.interior_dofs().size());
    const auto nb = static_cast<Eigen::Index>(space.boundary_dofs().size());
    std::vector<int> bidx(static_cast<std::size_t>(space.num_dofs()), -1);
    for (std::size_t i = 0; i < space.boundary_dofs().size(); ++i) bidx[static_cast<std::size_t>(space.boundary_dofs()[i])] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> ii, ib;
    for (int col = 0; col < full.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
            const int r = space.interior_index(static_cast<int>(it.row()));
            if (r < 0) continue;
            const int c = space.interior_index(static_cast<int>(it.col()));
            if (c >= 0)
                ii.emplace_back(r, c, it.value());
            else
                ib.emplace_back(r, bidx[static_cast<std::size_t>(it.col())], it.value());
        }
    SparseMatrix a(ni, ni), b(ni, nb);
    a.setFromTriplets(ii.begin(), ii.end());
    b.setFromTriplets(ib.begin(), ib.end());
    return {std::move(a), std::move(b)};
}

/// max over quadrature points of |cof(D^2 u) : D^2 w - (u_yy w_xx + u_xx w_yy - 2 u_xy w_xy)|.
inline double linearized_operator_check(const FeFunction& u, const FeFunction& w, int order = -1) {
    if (&u.space() != &w.space()) throw AssemblyError("linearized_operator_check: functions live on different spaces");
    const FeSpace& space = u.space();
    if (order < 0) order = default_quadrature_order(space);
    const Quadrature q = triangle_rule(order);
    const auto ref = space.reference(q);
    double worst = 0.0;
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const auto uc = u.local_coeffs(c);
        const auto wc = w.local_coeffs(c);
        for (std::size_t iq = 0; iq < q.size(); ++iq) {
            const BasisJet b = space.basis(c, ref[iq]);
            const Mat2 hu = FeFunction::combine(b, uc).hess;
            const Mat2 hw = FeFunction::combine(b, wc).hess;
            const double lhs = frobenius(cofactor(hu), hw);
            const double rhs = hu(1, 1) * hw(0, 0) + hu(0, 0) * hw(1, 1) - 2.0 * hu(0, 1) * hw(0, 1);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

/// Writes "row col value" lines (0-based, 17 significant digits).
inline void write_triplets(std::ostream& os, const SparseMatrix& m) {
    os << std::setprecision(17);
    for (int col = 0; col < m.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace mafem
