#pragma once

// C0 Lagrange finite element spaces of degree k on triangle meshes.

#include "mafem/field.hpp"
#include "mafem/mesh.hpp"
#include "mafem/quadrature.hpp"

#include <filesystem>
#include <memory>
#include <random>

namespace mafem {

class FeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reference Lagrange element with equispaced nodes on the unit triangle
/// (0,0), (1,0), (0,1). Basis functions are stored as monomial expansions,
/// so derivatives of every order are exact.
class LagrangeElement {
public:
    explicit LagrangeElement(int degree) : k_(degree) {
        if (degree < 1) throw FeError("LagrangeElement: degree must be >= 1");
        for (int i = 0; i <= k_; ++i)
            for (int j = 0; j <= k_ - i; ++j) {
                nodes_.push_back({k_ - i - j, i, j});
                exps_.push_back({i, j});
            }
        const auto n = static_cast<Eigen::Index>(nodes_.size());
        Eigen::MatrixXd vandermonde(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            const double x = double(nodes_[r][1]) / k_, y = double(nodes_[r][2]) / k_;
            for (Eigen::Index m = 0; m < n; ++m) vandermonde(r, m) = std::pow(x, exps_[m][0]) * std::pow(y, exps_[m][1]);
        }
        // column n of coeffs_ holds the monomial coefficients of basis n
        coeffs_ = vandermonde.fullPivLu().inverse();
    }

    int degree() const { return k_; }
    int size() const { return static_cast<int>(nodes_.size()); }

    /// Integer barycentric coordinates (summing to k) of local node i.
    const std::array<int, 3>& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

    Eigen::VectorXd values(double x, double y) const { return coeffs_.transpose() * monomials(x, y, 0, 0); }
    /// Reference gradients, one row per basis function.
    Eigen::MatrixXd gradients(double x, double y) const {
        Eigen::MatrixXd g(size(), 2);
        g.col(0) = coeffs_.transpose() * monomials(x, y, 1, 0);
        g.col(1) = coeffs_.transpose() * monomials(x, y, 0, 1);
        return g;
    }
    /// Reference second derivatives, columns (xx, xy, yy).
    Eigen::MatrixXd hessians(double x, double y) const {
        Eigen::MatrixXd h(size(), 3);
        h.col(0) = coeffs_.transpose() * monomials(x, y, 2, 0);
        h.col(1) = coeffs_.transpose() * monomials(x, y, 1, 1);
        h.col(2) = coeffs_.transpose() * monomials(x, y, 0, 2);
        return h;
    }

private:
    Eigen::VectorXd monomials(double x, double y, int dx, int dy) const {
        Eigen::VectorXd m(size());
        for (int i = 0; i < size(); ++i) {
            const int a = exps_[static_cast<std::size_t>(i)][0], b = exps_[static_cast<std::size_t>(i)][1];
            if (a < dx || b < dy) {
                m(i) = 0.0;
                continue;
            }
            double c = 1.0;
            for (int t = 0; t < dx; ++t) c *= a - t;
            for (int t = 0; t < dy; ++t) c *= b - t;
            m(i) = c * std::pow(x, a - dx) * std::pow(y, b - dy);
        }
        return m;
    }

    int k_;
    std::vector<std::array<int, 3>> nodes_;
    std::vector<std::array<int, 2>> exps_;
    Eigen::MatrixXd coeffs_;
};

/// Value, gradient and Hessian of a function at one point of a cell.
struct Jet {
    double value = 0.0;
    Point grad = Point::Zero();
    Mat2 hess = Mat2::Zero();
};

/// Basis data of one cell at one reference point, in physical coordinates.
struct BasisJet {
    Eigen::VectorXd phi;
    Eigen::MatrixXd grad;  ///< n x 2
    std::vector<Mat2> hess;
};

class FeSpace {
public:
    FeSpace(Mesh mesh, int degree)
        : mesh_(std::make_shared<const Mesh>(std::move(mesh))), element_(degree) {
        build();
    }
    FeSpace(std::shared_ptr<const Mesh> mesh, int degree) : mesh_(std::move(mesh)), element_(degree) { build(); }

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    const LagrangeElement& element() const { return element_; }
    int degree() const { return element_.degree(); }
    int dofs_per_cell() const { return element_.size(); }
    int num_dofs() const { return static_cast<int>(dof_coords_.size()); }
    const std::vector<Point>& dof_coords() const { return dof_coords_; }
    const std::vector<int>& cell_dofs(std::size_t c) const { return cell_dofs_[c]; }
    const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
    bool is_boundary(int dof) const { return boundary_mask_[static_cast<std::size_t>(dof)]; }
    const std::vector<int>& interior_dofs() const { return interior_dofs_; }
    /// Position of a dof among interior dofs, or -1 for boundary dofs.
    int interior_index(int dof) const { return interior_index_[static_cast<std::size_t>(dof)]; }
    const CellLocator& locator() const { return *locator_; }

    Point map_to_cell(std::size_t c, const std::array<double, 3>& bary) const {
        const auto p = mesh_->cell_points(c);
        return bary[0] * p[0] + bary[1] * p[1] + bary[2] * p[2];
    }

    /// Reference-element data at one point; cell independent.
    struct RefJet {
        Eigen::VectorXd phi;
        Eigen::MatrixXd grad;  ///< n x 2
        Eigen::MatrixXd hess;  ///< n x 3, columns (xx, xy, yy)
    };

    RefJet reference(const std::array<double, 3>& bary) const {
        return {element_.values(bary[1], bary[2]), element_.gradients(bary[1], bary[2]),
                element_.hessians(bary[1], bary[2])};
    }

    std::vector<RefJet> reference(const Quadrature& q) const {
        std::vector<RefJet> out;
        out.reserve(q.size());
        for (const auto& p : q.points) out.push_back(reference(p));
        return out;
    }

    /// Pushes reference data forward through the affine map of cell c.
    BasisJet basis(std::size_t c, const RefJet& r) const {
        const Mat2& binv = inv_jac_[c];
        BasisJet b;
        b.phi = r.phi;
        b.grad = r.grad * binv;  // rows: grad_ref^T Binv
        b.hess.resize(static_cast<std::size_t>(r.hess.rows()));
        for (Eigen::Index i = 0; i < r.hess.rows(); ++i) {
            Mat2 href;
            href << r.hess(i, 0), r.hess(i, 1), r.hess(i, 1), r.hess(i, 2);
            const Mat2 h = binv.transpose() * href * binv;
            b.hess[static_cast<std::size_t>(i)] = 0.5 * (h + h.transpose());  // bitwise symmetric
        }
        return b;
    }

    /// Physical basis values and derivatives on cell c at a barycentric point.
    BasisJet basis(std::size_t c, const std::array<double, 3>& bary) const { return basis(c, reference(bary)); }

    /// An edge shared by two cells; `plus` is the cell whose outward normal is `normal`.
    struct InteriorEdge {
        int a = 0, b = 0;
        int plus = 0, minus = 0;
        Point normal = Point::Zero();
        double length = 0.0;
    };
    const std::vector<InteriorEdge>& interior_edges() const { return interior_edges_; }

    /// Barycentric coordinates, in cell c, of the point (1 - s) x_a + s x_b on edge (a, b).
    std::array<double, 3> edge_point(std::size_t c, int a, int b, double s) const {
        const auto& cell = mesh_->cells()[c];
        std::array<double, 3> bary{0.0, 0.0, 0.0};
        for (int t = 0; t < 3; ++t) {
            if (cell[t] == a) bary[t] = 1.0 - s;
            if (cell[t] == b) bary[t] = s;
        }
        return bary;
    }

    /// Inverse Jacobian of the affine cell map (physical -> reference).
    const Mat2& inverse_jacobian(std::size_t c) const { return inv_jac_[c]; }

private:
    void build() {
        const Mesh& m = *mesh_;
        const int k = element_.degree();
        const int nv = static_cast<int>(m.num_vertices());
        std::map<std::pair<int, int>, int> edge_id;
        for (const auto& c : m.cells())
            for (int i = 0; i < 3; ++i) {
                const int a = std::min(c[i], c[(i + 1) % 3]), b = std::max(c[i], c[(i + 1) % 3]);
                edge_id.emplace(std::make_pair(a, b), static_cast<int>(edge_id.size()));
            }
        const int ne = static_cast<int>(edge_id.size());
        const int per_interior = (k - 1) * (k - 2) / 2;
        const int ndofs = nv + ne * (k - 1) + static_cast<int>(m.num_cells()) * per_interior;
        dof_coords_.assign(static_cast<std::size_t>(ndofs), Point::Zero());
        cell_dofs_.resize(m.num_cells());
        inv_jac_.resize(m.num_cells());
        for (std::size_t c = 0; c < m.num_cells(); ++c) {
            const auto& cell = m.cells()[c];
            const auto p = m.cell_points(c);
            Mat2 jac;
            jac.col(0) = p[1] - p[0];
            jac.col(1) = p[2] - p[0];
            inv_jac_[c] = jac.inverse();
            int next_interior = 0;
            auto& dofs = cell_dofs_[c];
            dofs.resize(static_cast<std::size_t>(element_.size()));
            for (int i = 0; i < element_.size(); ++i) {
                const auto& l = element_.node(i);
                const int nonzero = (l[0] > 0) + (l[1] > 0) + (l[2] > 0);
                int dof = -1;
                if (nonzero == 1) {
                    dof = cell[l[0] > 0 ? 0 : (l[1] > 0 ? 1 : 2)];
                } else if (nonzero == 2) {
                    int va = -1, vb = -1, la = 0, lb = 0;
                    for (int t = 0; t < 3; ++t) {
                        if (l[t] == 0) continue;
                        if (va < 0) {
                            va = cell[t];
                            la = l[t];
                        } else {
                            vb = cell[t];
                            lb = l[t];
                        }
                    }
                    if (va > vb) {
                        std::swap(va, vb);
                        std::swap(la, lb);
                    }
                    dof = nv + edge_id.at({va, vb}) * (k - 1) + (lb - 1);
                } else {
                    dof = nv + ne * (k - 1) + static_cast<int>(c) * per_interior + next_interior++;
                }
                dofs[static_cast<std::size_t>(i)] = dof;
                dof_coords_[static_cast<std::size_t>(dof)] =
                    (l[0] * p[0] + l[1] * p[1] + l[2] * p[2]) / static_cast<double>(k);
            }
        }
        boundary_mask_.assign(static_cast<std::size_t>(ndofs), false);
        for (const auto& e : m.boundary_edges()) {
            boundary_mask_[static_cast<std::size_t>(e.a)] = true;
            boundary_mask_[static_cast<std::size_t>(e.b)] = true;
            const int id = edge_id.at({std::min(e.a, e.b), std::max(e.a, e.b)});
            for (int t = 0; t < k - 1; ++t) boundary_mask_[static_cast<std::size_t>(nv + id * (k - 1) + t)] = true;
        }
        interior_index_.assign(static_cast<std::size_t>(ndofs), -1);
        for (int d = 0; d < ndofs; ++d) {
            if (boundary_mask_[static_cast<std::size_t>(d)]) {
                boundary_dofs_.push_back(d);
            } else {
                interior_index_[static_cast<std::size_t>(d)] = static_cast<int>(interior_dofs_.size());
                interior_dofs_.push_back(d);
            }
        }
        std::map<std::pair<int, int>, std::vector<int>> edge_cells;
        for (std::size_t c = 0; c < m.num_cells(); ++c)
            for (int i = 0; i < 3; ++i) {
                const auto& cell = m.cells()[c];
                edge_cells[{std::min(cell[i], cell[(i + 1) % 3]), std::max(cell[i], cell[(i + 1) % 3])}].push_back(static_cast<int>(c));
            }
        for (const auto& [e, cs] : edge_cells) {
            if (cs.size() != 2) continue;
            InteriorEdge ie;
            ie.a = e.first;
            ie.b = e.second;
            ie.plus = cs[0];
            ie.minus = cs[1];
            const Point t = m.vertex(ie.b) - m.vertex(ie.a);
            ie.length = t.norm();
            ie.normal = Point(t.y(), -t.x()) / ie.length;
            // orient the normal out of the plus cell
            const auto& pc = m.cells()[static_cast<std::size_t>(ie.plus)];
            const int opposite = pc[0] != ie.a && pc[0] != ie.b ? pc[0] : (pc[1] != ie.a && pc[1] != ie.b ? pc[1] : pc[2]);
            if (ie.normal.dot(m.vertex(opposite) - m.vertex(ie.a)) > 0.0) ie.normal = -ie.normal;
            interior_edges_.push_back(ie);
        }
        locator_ = std::make_shared<CellLocator>(m);
    }

    std::shared_ptr<const Mesh> mesh_;
    LagrangeElement element_;
    std::vector<Point> dof_coords_;
    std::vector<std::vector<int>> cell_dofs_;
    std::vector<Mat2> inv_jac_;
    std::vector<bool> boundary_mask_;
    std::vector<int> boundary_dofs_;
    std::vector<int> interior_dofs_;
    std::vector<int> interior_index_;
    std::vector<InteriorEdge> interior_edges_;
    std::shared_ptr<const CellLocator> locator_;
};

/// A member of an FeSpace, as a coefficient vector over global dofs.
class FeFunction {
public:
    FeFunction() = default;
    explicit FeFunction(std::shared_ptr<const FeSpace> space)
        : space_(std::move(space)), coeffs_(Eigen::VectorXd::Zero(space_->num_dofs())) {}
    FeFunction(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coeffs)
        : space_(std::move(space)), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != space_->num_dofs()) throw FeError("FeFunction: coefficient count does not match space");
        if (!coeffs_.allFinite()) throw FeError("FeFunction: non-finite coefficient");
    }

    const FeSpace& space() const { return *space_; }
    const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }

    Eigen::VectorXd local_coeffs(std::size_t c) const {
        const auto& dofs = space_->cell_dofs(c);
        Eigen::VectorXd u(static_cast<Eigen::Index>(dofs.size()));
        for (std::size_t i = 0; i < dofs.size(); ++i) u(static_cast<Eigen::Index>(i)) = coeffs_(dofs[i]);
        return u;
    }

    static Jet combine(const BasisJet& b, const Eigen::VectorXd& u) {
        Jet j;
        j.value = b.phi.dot(u);
        j.grad = b.grad.transpose() * u;
        for (Eigen::Index i = 0; i < u.size(); ++i) j.hess += u(i) * b.hess[static_cast<std::size_t>(i)];
        return j;
    }

    /// Cellwise jet at a barycentric point of cell c.
    Jet jet(std::size_t c, const std::array<double, 3>& bary) const { return combine(space_->basis(c, bary), local_coeffs(c)); }

    /// Jet at a physical point (cell chosen by the locator).
    Jet jet(const Point& x) const {
        const auto hit = space_->locator().locate(x);
        if (!hit) throw FeError("FeFunction: point outside the mesh");
        return jet(static_cast<std::size_t>(hit->cell), hit->bary);
    }

    double operator()(const Point& x) const { return jet(x).value; }

    FeFunction& operator+=(const FeFunction& o) {
        coeffs_ += o.coeffs_;
        return *this;
    }

private:
    std::shared_ptr<const FeSpace> space_;
    Eigen::VectorXd coeffs_;
};

/// Nodal interpolant: coefficients are the values of u at the Lagrange nodes.
inline FeFunction interpolate(std::shared_ptr<const FeSpace> space, const ScalarField& u) {
    Eigen::VectorXd c(space->num_dofs());
    for (int d = 0; d < space->num_dofs(); ++d) {
        c(d) = u(space->dof_coords()[static_cast<std::size_t>(d)]);
        if (!std::isfinite(c(d))) throw FeError("interpolate: non-finite value at Lagrange node " + std::to_string(d));
    }
    return FeFunction(std::move(space), std::move(c));
}

// ---------------------------------------------------------------------------
// Broken Sobolev norms
//
// Order-t seminorm pointwise: |v| (t=0), |grad v| (t=1), |D^2 v|_F (t=2).
// The full norm sums (p=2) or maxes (p=inf) the seminorms of order <= t.
// Sup norms are sampled on a barycentric lattice plus the quadrature points.

enum class Lp { L2, Linf };

namespace detail {

inline double seminorm_density(const Jet& j, int t) {
    switch (t) {
        case 0: return std::abs(j.value);
        case 1: return j.grad.norm();
        default: return j.hess.norm();
    }
}

inline std::vector<std::array<double, 3>> sample_lattice(int n) {
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n - i; ++j) pts.push_back({double(n - i - j) / n, double(i) / n, double(j) / n});
    return pts;
}

/// Per-cell norms of the pointwise jet produced by `jet_at(c, bary, basis)`.
template <class JetFn>
std::vector<double> cell_norms(const FeSpace& space, JetFn&& jet_at, int t, bool seminorm, Lp p, int quad_order) {
    if (t < 0 || t > 2) throw FeError("broken norm: derivative order must be 0, 1 or 2");
    const Quadrature q = triangle_rule(quad_order);
    std::vector<std::array<double, 3>> samples = q.points;
    if (p == Lp::Linf) {
        const auto lat = sample_lattice(std::max(2 * space.degree(), 6));
        samples.insert(samples.end(), lat.begin(), lat.end());
    }
    const int t0 = seminorm ? t : 0;
    std::vector<double> out(space.mesh().num_cells(), 0.0);
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        double acc = 0.0;
        if (p == Lp::L2) {
            for (std::size_t i = 0; i < q.size(); ++i) {
                const Jet j = jet_at(c, q.points[i]);
                for (int s = t0; s <= t; ++s) {
                    const double d = seminorm_density(j, s);
                    acc += q.weights[i] * d * d;
                }
            }
            out[c] = std::sqrt(acc * space.mesh().cell_area(c));
        } else {
            for (const auto& b : samples) {
                const Jet j = jet_at(c, b);
                for (int s = t0; s <= t; ++s) acc = std::max(acc, seminorm_density(j, s));
            }
            out[c] = acc;
        }
    }
    return out;
}

inline double aggregate(const std::vector<double>& per_cell, Lp p) {
    double acc = 0.0;
    for (double v : per_cell) acc = p == Lp::L2 ? acc + v * v : std::max(acc, v);
    return p == Lp::L2 ? std::sqrt(acc) : acc;
}

}  // namespace detail

/// ||v||_{t,p,h}: (sum_K ||v||_{t,p,K}^2)^(1/2) for p = 2, max_K for p = inf.
inline double broken_norm(const FeFunction& v, int t, Lp p) {
    auto jet_at = [&](std::size_t c, const std::array<double, 3>& b) { return v.jet(c, b); };
    return detail::aggregate(detail::cell_norms(v.space(), jet_at, t, false, p, 2 * v.space().degree()), p);
}

/// |v|_{t,p,h}, the broken seminorm of order exactly t.
inline double broken_seminorm(const FeFunction& v, int t, Lp p) {
    auto jet_at = [&](std::size_t c, const std::array<double, 3>& b) { return v.jet(c, b); };
    return detail::aggregate(detail::cell_norms(v.space(), jet_at, t, true, p, 2 * v.space().degree()), p);
}

/// Broken norm of u - v_h with exact derivatives of u; integrals use a rule
/// of order 2k + 6 since u is not polynomial.
inline double broken_error(const FeFunction& v, const SmoothFunction& u, int t, Lp p, bool seminorm = false) {
    const FeSpace& space = v.space();
    auto jet_at = [&](std::size_t c, const std::array<double, 3>& b) {
        Jet j = v.jet(c, b);
        const Point x = space.map_to_cell(c, b);
        j.value -= u.value(x);
        if (t >= 1) j.grad -= u.gradient(x);
        if (t >= 2) j.hess -= u.hessian(x);
        return j;
    };
    return detail::aggregate(detail::cell_norms(space, jet_at, t, seminorm, p, 2 * space.degree() + 6), p);
}

/// Empirical inverse-inequality constant: max over random members v and
/// cells K of ||v||_{2,inf,K} / (h_K^(-2-d/2) ||v||_{0,2,K}), d = 2.
/// Members with zero L2 norm are skipped.
inline double verify_inverse_inequality(std::shared_ptr<const FeSpace> space, int trials, unsigned seed = 1) {
    if (trials < 1) throw FeError("verify_inverse_inequality: need at least one trial");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd c(space->num_dofs());
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = dist(rng);
        const FeFunction v(space, c);
        auto jet_at = [&](std::size_t cell, const std::array<double, 3>& b) { return v.jet(cell, b); };
        const auto sup = detail::cell_norms(*space, jet_at, 2, false, Lp::Linf, 2 * space->degree());
        const auto l2 = detail::cell_norms(*space, jet_at, 0, false, Lp::L2, 2 * space->degree());
        for (std::size_t k = 0; k < sup.size(); ++k) {
            if (l2[k] == 0.0) continue;
            const double hk = space->mesh().cell_diameter(k);
            worst = std::max(worst, sup[k] / (std::pow(hk, -3.0) * l2[k]));
        }
    }
    return worst;
}

/// Same ratio as verify_inverse_inequality for one given member (0 for v = 0).
inline double inverse_ratio(const FeFunction& v) {
    const FeSpace& space = v.space();
    auto jet_at = [&](std::size_t cell, const std::array<double, 3>& b) { return v.jet(cell, b); };
    const auto sup = detail::cell_norms(space, jet_at, 2, false, Lp::Linf, 2 * space.degree());
    const auto l2 = detail::cell_norms(space, jet_at, 0, false, Lp::L2, 2 * space.degree());
    double worst = 0.0;
    for (std::size_t k = 0; k < sup.size(); ++k) {
        if (l2[k] == 0.0) continue;
        worst = std::max(worst, sup[k] / (std::pow(space.mesh().cell_diameter(k), -3.0) * l2[k]));
    }
    return worst;
}

// FeFunction text format:
//   mafem-fefunction 1
//   mesh <path>
//   degree <k>
//   ndofs <n>
//   <n coefficient lines, 17 significant digits>
inline void write_fefunction(const std::filesystem::path& file, const FeFunction& v, const std::string& mesh_ref) {
    std::ofstream os(file);
    if (!os) throw FeError("write_fefunction: cannot open " + file.string());
    os << "mafem-fefunction 1\nmesh " << mesh_ref << "\ndegree " << v.space().degree() << "\nndofs "
       << v.space().num_dofs() << '\n'
       << std::setprecision(17);
    for (Eigen::Index i = 0; i < v.coeffs().size(); ++i) os << v.coeffs()(i) << '\n';
}

/// Reads a function file; the mesh reference is resolved relative to the file.
inline FeFunction read_fefunction(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw FeError("read_fefunction: cannot open " + file.string());
    std::string tag, key, mesh_ref;
    int version = 0, degree = 0, ndofs = 0;
    if (!(is >> tag >> version) || tag != "mafem-fefunction") throw FeError("read_fefunction: bad header");
    if (!(is >> key >> mesh_ref) || key != "mesh") throw FeError("read_fefunction: missing mesh reference");
    if (!(is >> key >> degree) || key != "degree") throw FeError("read_fefunction: missing degree");
    if (!(is >> key >> ndofs) || key != "ndofs") throw FeError("read_fefunction: missing ndofs");
    std::filesystem::path mesh_path = mesh_ref;
    if (mesh_path.is_relative()) mesh_path = file.parent_path() / mesh_path;
    std::ifstream ms(mesh_path);
    if (!ms) throw FeError("read_fefunction: cannot open mesh " + mesh_path.string());
    auto space = std::make_shared<const FeSpace>(read_mesh(ms), degree);
    if (space->num_dofs() != ndofs) throw FeError("read_fefunction: dof count does not match mesh and degree");
    Eigen::VectorXd c(ndofs);
    for (int i = 0; i < ndofs; ++i)
        if (!(is >> c(i))) throw FeError("read_fefunction: truncated coefficient list");
    return FeFunction(std::move(space), std::move(c));
}

}  // namespace mafem
