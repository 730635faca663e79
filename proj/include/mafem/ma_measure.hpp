#pragma once

// Monge-Ampere measures of finite element functions, normal mappings of
// piecewise-linear functions, convex envelopes of boundary data and
// Hausdorff distances of sampled upper graphs.

#include "mafem/convexity.hpp"

#include <map>

namespace mafem {

class MeasureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lower-left-first convex hull (Andrew's monotone chain), CCW, collinear points dropped.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

inline double polygon_area(const std::vector<Point>& poly) { return std::abs(signed_area(poly)); }

// ---------------------------------------------------------------- P1 normal mapping

struct SubdifferentialPolygon {
    Point vertex = Point::Zero();
    std::vector<Point> gradient_vertices;  ///< cell gradients in cyclic order around the vertex
    double area = 0.0;
};

namespace detail {

inline void require_p1(const FeFunction& v) {
    if (v.space().degree() != 1) throw MeasureError("expected a piecewise-linear (degree 1) function");
}

inline Point cell_gradient(const FeFunction& v, std::size_t c) {
    return v.jet(c, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}).grad;
}

}  // namespace detail

/// Interior edges across which the normal derivative of a P1 function
/// decreases, i.e. where convexity fails.
inline std::vector<std::pair<int, int>> p1_convexity_violations(const FeFunction& v, double tol = 1e-12) {
    detail::require_p1(v);
    std::vector<std::pair<int, int>> bad;
    for (const auto& e : v.space().interior_edges()) {
        const double jump = (detail::cell_gradient(v, static_cast<std::size_t>(e.minus)) -
                             detail::cell_gradient(v, static_cast<std::size_t>(e.plus)))
                                .dot(e.normal);
        if (jump < -tol) bad.emplace_back(e.a, e.b);
    }
    return bad;
}

inline std::vector<bool> boundary_vertex_mask(const Mesh& mesh) {
    std::vector<bool> mask(mesh.num_vertices(), false);
    for (const auto& e : mesh.boundary_edges()) {
        mask[static_cast<std::size_t>(e.a)] = true;
        mask[static_cast<std::size_t>(e.b)] = true;
    }
    return mask;
}

/// Subdifferential of a convex P1 function at an interior mesh vertex: the
/// polygon spanned by the gradients of the incident cells.
inline SubdifferentialPolygon subdifferential_p1(const FeFunction& v, int vertex) {
    detail::require_p1(v);
    const Mesh& mesh = v.space().mesh();
    if (vertex < 0 || static_cast<std::size_t>(vertex) >= mesh.num_vertices()) throw MeasureError("subdifferential_p1: vertex out of range");
    if (boundary_vertex_mask(mesh)[static_cast<std::size_t>(vertex)])
        throw MeasureError("subdifferential_p1: vertex " + std::to_string(vertex) + " lies on the boundary (unsupported location)");
    const auto bad = p1_convexity_violations(v);
    if (!bad.empty()) {
        std::string msg = "subdifferential_p1: function is not convex across edges";
        for (const auto& [a, b] : bad) msg += " (" + std::to_string(a) + "," + std::to_string(b) + ")";
        throw MeasureError(msg);
    }
    const Point x0 = mesh.vertex(vertex);
    std::vector<std::pair<double, Point>> ring;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto& cell = mesh.cells()[c];
        if (cell[0] != vertex && cell[1] != vertex && cell[2] != vertex) continue;
        const auto p = mesh.cell_points(c);
        const Point d = (p[0] + p[1] + p[2]) / 3.0 - x0;
        ring.emplace_back(std::atan2(d.y(), d.x()), detail::cell_gradient(v, c));
    }
    std::sort(ring.begin(), ring.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    SubdifferentialPolygon s;
    s.vertex = x0;
    for (const auto& [angle, g] : ring) s.gradient_vertices.push_back(g);
    s.area = polygon_area(s.gradient_vertices);
    return s;
}

/// Area of the convex hull of all cell gradients: the brute-force image of
/// the normal mapping of a convex P1 function.
inline double gradient_hull_area(const FeFunction& v) {
    detail::require_p1(v);
    std::vector<Point> g;
    for (std::size_t c = 0; c < v.space().mesh().num_cells(); ++c) g.push_back(detail::cell_gradient(v, c));
    return polygon_area(convex_hull(std::move(g)));
}

// ---------------------------------------------------------------- partial measure

/// Monge-Ampere measure split into the absolutely continuous cell part and,
/// for P1 functions, vertex atoms.
struct MaMeasure {
    std::vector<double> cell_mass;   ///< int_K det D^2 v
    std::map<int, double> vertex_atoms;
    double total() const {
        double t = std::accumulate(cell_mass.begin(), cell_mass.end(), 0.0);
        for (const auto& [v, a] : vertex_atoms) t += a;
        return t;
    }
};

namespace detail {

inline int determinant_order(const FeSpace& space) { return std::max(2 * space.degree() - 4, 0); }

/// Fan triangulation of a convex polygon from its first vertex.
template <class Fn>
void for_each_fan_triangle(const std::vector<Point>& poly, Fn&& fn) {
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) fn(poly[0], poly[i], poly[i + 1]);
}

}  // namespace detail

/// M[v](E) = sum_K int_{E cap K} det D^2 v, by exact clipping and exact
/// quadrature for the polynomial density.
inline double partial_ma_measure(const FeFunction& v, const ConvexPolygon& region, double convexity_tol = 1e-10) {
    const FeSpace& space = v.space();
    const Mesh& mesh = space.mesh();
    for (const auto& p : region.vertices())
        if (!space.locator().locate(p, 1e-12)) throw MeasureError("partial_ma_measure: region is not contained in the mesh domain");
    const Quadrature q = triangle_rule(detail::determinant_order(space));
    double total = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto p = mesh.cell_points(c);
        std::vector<Point> tri{p[0], p[1], p[2]};
        const auto piece = clip_convex(tri, region.vertices());
        if (piece.size() < 3) continue;
        const auto uc = v.local_coeffs(c);
        detail::for_each_fan_triangle(piece, [&](const Point& a, const Point& b, const Point& d) {
            const double area = triangle_area(a, b, d);
            if (area <= 0.0) return;
            for (std::size_t i = 0; i < q.size(); ++i) {
                const auto& l = q.points[i];
                const Point x = l[0] * a + l[1] * b + l[2] * d;
                const double det = FeFunction::combine(space.basis(c, space.locator().barycentric(c, x)), uc).hess.determinant();
                if (det < -convexity_tol) throw MeasureError("partial_ma_measure: function is not piecewise convex on cell " + std::to_string(c));
                total += q.weights[i] * area * det;
            }
        });
    }
    return total;
}

/// Cell masses and (for degree 1) interior vertex atoms.
inline MaMeasure ma_measure(const FeFunction& v) {
    const FeSpace& space = v.space();
    MaMeasure m;
    m.cell_mass.assign(space.mesh().num_cells(), 0.0);
    if (space.degree() >= 2) {
        const Quadrature q = triangle_rule(detail::determinant_order(space));
        const auto ref = space.reference(q);
        for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
            const auto uc = v.local_coeffs(c);
            for (std::size_t i = 0; i < q.size(); ++i)
                m.cell_mass[c] += q.weights[i] * space.mesh().cell_area(c) * FeFunction::combine(space.basis(c, ref[i]), uc).hess.determinant();
        }
    } else {
        const auto boundary = boundary_vertex_mask(space.mesh());
        for (std::size_t i = 0; i < boundary.size(); ++i)
            if (!boundary[i]) m.vertex_atoms[static_cast<int>(i)] = subdifferential_p1(v, static_cast<int>(i)).area;
    }
    return m;
}

// ---------------------------------------------------------------- weak convergence

/// Smooth bump a * exp(-1 / (1 - |x - c|^2 / r^2)) supported in the open disk B(c, r).
struct Bump {
    Point center = Point::Zero();
    double radius = 1.0;
    double amplitude = 1.0;

    double operator()(const Point& x) const {
        const double s = (x - center).squaredNorm() / (radius * radius);
        return s < 1.0 ? amplitude * std::exp(-1.0 / (1.0 - s)) : 0.0;
    }
};

namespace detail {

/// Rule order for integrating a bump against a cell polynomial.
inline int bump_order(const FeSpace& space) { return 2 * space.degree() + 10; }

inline void require_interior_support(const FeSpace& space, const Bump& p) {
    const Mesh& mesh = space.mesh();
    for (const auto& e : mesh.boundary_edges())
        if (segment_distance(p.center, mesh.vertex(e.a), mesh.vertex(e.b)) <= p.radius)
            throw MeasureError("test function support touches the boundary");
    if (!space.locator().locate(p.center)) throw MeasureError("test function is centred outside the domain");
}

}  // namespace detail

/// int p dM[v]: the cell densities plus, for P1 functions, the vertex atoms.
inline double integrate_against_measure(const FeFunction& v, const Bump& p) {
    const FeSpace& space = v.space();
    detail::require_interior_support(space, p);
    double total = 0.0;
    if (space.degree() >= 2) {
        const Quadrature q = triangle_rule(detail::bump_order(space));
        const auto ref = space.reference(q);
        for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
            const auto pts = space.mesh().cell_points(c);
            const double reach = std::max({(pts[0] - p.center).norm(), (pts[1] - p.center).norm(), (pts[2] - p.center).norm()});
            if (reach - space.mesh().cell_diameter(c) >= p.radius) continue;
            const auto uc = v.local_coeffs(c);
            for (std::size_t i = 0; i < q.size(); ++i) {
                const double w = p(space.map_to_cell(c, q.points[i]));
                if (w == 0.0) continue;
                total += q.weights[i] * space.mesh().cell_area(c) * w *
                         FeFunction::combine(space.basis(c, ref[i]), uc).hess.determinant();
            }
        }
    } else {
        for (const auto& [vertex, atom] : ma_measure(v).vertex_atoms) total += p(space.mesh().vertex(vertex)) * atom;
    }
    return total;
}

/// int p f dx on the cells of a mesh, for comparing discrete measures with f dx.
inline double integrate_density(const FeSpace& space, const ScalarField& f, const Bump& p) {
    detail::require_interior_support(space, p);
    const Quadrature q = triangle_rule(detail::bump_order(space));
    double total = 0.0;
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c)
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Point x = space.map_to_cell(c, q.points[i]);
            const double w = p(x);
            if (w != 0.0) total += q.weights[i] * space.mesh().cell_area(c) * w * f(x);
        }
    return total;
}

/// |int p dM[v_j] - int p dM[limit]| for each j.
inline std::vector<double> weak_convergence_residual(const std::vector<FeFunction>& sequence, const FeFunction& limit, const Bump& p) {
    const double target = integrate_against_measure(limit, p);
    std::vector<double> out;
    for (const auto& v : sequence) out.push_back(std::abs(integrate_against_measure(v, p) - target));
    return out;
}

/// Same, against an absolutely continuous limit measure f dx.
inline std::vector<double> weak_convergence_residual(const std::vector<FeFunction>& sequence, const ScalarField& density, const Bump& p) {
    std::vector<double> out;
    for (const auto& v : sequence) out.push_back(std::abs(integrate_against_measure(v, p) - integrate_density(v.space(), density, p)));
    return out;
}

// ---------------------------------------------------------------- Aleksandrov bound

struct AleksandrovReport {
    double slack = 0.0;  ///< max over samples; <= 0 means the bound holds
    double boundary_min = 0.0;
    double diameter = 0.0;
    double integral_a = 0.0;
    double c_n = 1.0;
    Point worst = Point::Zero();
    std::size_t samples = 0;
};

/// Samples (max(0, C - v(x)))^2 - c_n diam(Omega) d(x, boundary) int a, with
/// C the minimum of v on the boundary.
inline AleksandrovReport aleksandrov_bound(const FeFunction& v, const ScalarField& a, double c_n = 1.0, int lattice = 6) {
    if (!(c_n > 0.0)) throw std::invalid_argument("aleksandrov_bound: c_n must be positive");
    const FeSpace& space = v.space();
    const Mesh& mesh = space.mesh();
    AleksandrovReport r;
    r.c_n = c_n;
    r.boundary_min = std::numeric_limits<double>::infinity();
    for (const auto& e : mesh.boundary_edges())
        for (int s = 0; s <= lattice; ++s) {
            const Point x = mesh.vertex(e.a) + (mesh.vertex(e.b) - mesh.vertex(e.a)) * (static_cast<double>(s) / lattice);
            r.boundary_min = std::min(r.boundary_min, v(x));
        }
    for (const auto& e1 : mesh.boundary_edges())
        for (const auto& e2 : mesh.boundary_edges()) r.diameter = std::max(r.diameter, (mesh.vertex(e1.a) - mesh.vertex(e2.a)).norm());
    const Quadrature q = triangle_rule(2 * space.degree() + 2);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        for (std::size_t i = 0; i < q.size(); ++i) r.integral_a += q.weights[i] * mesh.cell_area(c) * a(space.map_to_cell(c, q.points[i]));

    const auto lat = detail::sample_lattice(lattice);
    r.slack = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        for (const auto& b : lat) {
            const Point x = space.map_to_cell(c, b);
            double dist = std::numeric_limits<double>::infinity();
            for (const auto& e : mesh.boundary_edges()) dist = std::min(dist, segment_distance(x, mesh.vertex(e.a), mesh.vertex(e.b)));
            const double depth = std::max(0.0, r.boundary_min - v.jet(c, b).value);
            const double s = depth * depth - c_n * r.diameter * dist * r.integral_a;
            ++r.samples;
            if (s > r.slack) {
                r.slack = s;
                r.worst = x;
            }
        }
    return r;
}

// ---------------------------------------------------------------- convex envelope

struct BoundarySample {
    Point x = Point::Zero();
    int edge = 0;
    double b = 0.0;         ///< data
    double envelope = 0.0;  ///< b* at x
};

/// Convex envelope of boundary data, restricted to the boundary.
///
/// A boundary point x lies on an edge, which is a face of the convex domain,
/// so every convex combination of samples that represents x uses samples from
/// that edge only. The lower hull of the 3D sample set restricted to the edge
/// is therefore the 1D lower hull of the samples on that edge, which is what
/// is computed here.
class BoundaryEnvelope {
public:
    BoundaryEnvelope(const ConvexPolygon& polygon, const ScalarField& b, int resolution) : polygon_(polygon) {
        if (resolution < 3) throw MeasureError("convex_envelope_boundary: need at least 3 samples per edge");
        const std::size_t n = polygon.size();
        for (std::size_t e = 0; e < n; ++e) {
            const Point a = polygon.vertex(e), d = polygon.vertex((e + 1) % n);
            std::vector<BoundarySample> edge;
            for (int s = 0; s < resolution; ++s) {
                BoundarySample bs;
                bs.x = a + (d - a) * (static_cast<double>(s) / (resolution - 1));
                bs.edge = static_cast<int>(e);
                bs.b = b(bs.x);
                if (!std::isfinite(bs.b)) throw MeasureError("convex_envelope_boundary: non-finite boundary value");
                edge.push_back(bs);
            }
            lower_hull_1d(edge);
            // the last sample of an edge is the first of the next one
            samples_.insert(samples_.end(), edge.begin(), edge.end() - 1);
        }
    }

    const std::vector<BoundarySample>& samples() const { return samples_; }

    /// Piecewise-linear evaluation along the boundary.
    double operator()(const Point& x) const {
        double best = std::numeric_limits<double>::infinity();
        double value = 0.0;
        const std::size_t n = samples_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = samples_[i];
            const auto& q = samples_[(i + 1) % n];
            const double d = segment_distance(x, p.x, q.x);
            if (d < best) {
                best = d;
                const double len2 = (q.x - p.x).squaredNorm();
                const double t = std::clamp((x - p.x).dot(q.x - p.x) / len2, 0.0, 1.0);
                value = (1.0 - t) * p.envelope + t * q.envelope;
            }
        }
        if (best > 1e-9 * std::max(1.0, polygon_.diameter())) throw MeasureError("boundary envelope evaluated away from the boundary");
        return value;
    }

private:
    static void lower_hull_1d(std::vector<BoundarySample>& edge) {
        const auto s = [&](std::size_t i) { return static_cast<double>(i); };
        std::vector<std::size_t> hull;
        for (std::size_t i = 0; i < edge.size(); ++i) {
            while (hull.size() >= 2) {
                const std::size_t i0 = hull[hull.size() - 2], i1 = hull.back();
                const double cr = (s(i1) - s(i0)) * (edge[i].b - edge[i0].b) - (edge[i1].b - edge[i0].b) * (s(i) - s(i0));
                if (cr <= 0.0)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(i);
        }
        for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
            const std::size_t i0 = hull[h], i1 = hull[h + 1];
            for (std::size_t i = i0; i <= i1; ++i) {
                const double t = (s(i) - s(i0)) / (s(i1) - s(i0));
                edge[i].envelope = i == i0 ? edge[i0].b : (i == i1 ? edge[i1].b : (1.0 - t) * edge[i0].b + t * edge[i1].b);
            }
        }
    }

    ConvexPolygon polygon_;
    std::vector<BoundarySample> samples_;
};

inline BoundaryEnvelope convex_envelope_boundary(const ConvexPolygon& polygon, const ScalarField& b, int resolution) {
    return BoundaryEnvelope(polygon, b, resolution);
}

/// Lower convex hull of the 3D points (x_i, z_i) evaluated at x, by brute
/// force over all triangles, segments and points whose projection contains x.
/// Returns +inf outside the projected hull.
inline double lower_hull_at(const std::vector<Point>& xs, const std::vector<double>& zs, const Point& x, double tol = 1e-12) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = xs.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((xs[i] - x).norm() <= tol) best = std::min(best, zs[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point d = xs[j] - xs[i];
            const double len2 = d.squaredNorm();
            if (len2 > 0.0 && std::abs(cross(d, x - xs[i])) <= tol * std::sqrt(len2)) {
                const double t = (x - xs[i]).dot(d) / len2;
                if (t >= -tol && t <= 1.0 + tol) best = std::min(best, (1.0 - t) * zs[i] + t * zs[j]);
            }
            for (std::size_t k = j + 1; k < n; ++k) {
                const double area = orient(xs[i], xs[j], xs[k]);
                if (std::abs(area) <= 1e-300) continue;
                const double l0 = orient(x, xs[j], xs[k]) / area;
                const double l1 = orient(xs[i], x, xs[k]) / area;
                const double l2 = 1.0 - l0 - l1;
                if (l0 < -tol || l1 < -tol || l2 < -tol) continue;
                best = std::min(best, l0 * zs[i] + l1 * zs[j] + l2 * zs[k]);
            }
        }
    }
    return best;
}

/// Convex envelope b*(x) of boundary data at an interior or boundary point,
/// from the lower hull of the boundary samples of `env`.
inline double convex_envelope_at(const BoundaryEnvelope& env, const Point& x) {
    std::vector<Point> xs;
    std::vector<double> zs;
    for (const auto& s : env.samples()) {
        xs.push_back(s.x);
        zs.push_back(s.b);
    }
    return lower_hull_at(xs, zs, x);
}

// ---------------------------------------------------------------- upper graphs

using Point3 = Eigen::Vector3d;

/// Sampled upper graph {(x, t) : v(x) <= t <= top} with t-spacing dt.
struct UpperGraph {
    std::vector<Point3> points;
    double resolution = 0.0;
    bool boundary = false;
};

inline UpperGraph make_upper_graph(const std::vector<Point>& xs, const std::vector<double>& values, double top, double dt,
                                   double x_spacing, bool boundary = false) {
    if (xs.size() != values.size()) throw std::invalid_argument("make_upper_graph: size mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("make_upper_graph: dt must be positive");
    UpperGraph g;
    g.resolution = std::max(dt, x_spacing);
    g.boundary = boundary;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (values[i] > top) throw std::invalid_argument("make_upper_graph: value above truncation level");
        for (double t = values[i]; t <= top + 1e-14; t += dt) g.points.emplace_back(xs[i].x(), xs[i].y(), t);
        g.points.emplace_back(xs[i].x(), xs[i].y(), top);
    }
    return g;
}

template <class P>
double hausdorff_distance(const std::vector<P>& a, const std::vector<P>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff_distance: empty point set");
    auto directed = [](const std::vector<P>& from, const std::vector<P>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                best = std::min(best, (p - q).squaredNorm());
                if (best <= worst) break;  // cannot raise the max
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

struct GraphConvergence {
    double sup_difference = 0.0;
    double hausdorff = 0.0;
    bool within_bound = false;  ///< hausdorff <= sup_difference + resolution
};

/// For each b_s, the sampled sup |b_s - b| and the Hausdorff distance of the
/// truncated upper graphs over the sample set X.
inline std::vector<GraphConvergence> graph_convergence_check(const std::vector<ScalarField>& sequence, const ScalarField& b,
                                                             const std::vector<Point>& xs, double x_spacing, double dt) {
    std::vector<double> vb;
    for (const auto& x : xs) vb.push_back(b(x));
    std::vector<std::vector<double>> vs;
    double top = *std::max_element(vb.begin(), vb.end());
    for (const auto& bs : sequence) {
        std::vector<double> v;
        for (const auto& x : xs) v.push_back(bs(x));
        top = std::max(top, *std::max_element(v.begin(), v.end()));
        vs.push_back(std::move(v));
    }
    top += dt;
    const UpperGraph gb = make_upper_graph(xs, vb, top, dt, x_spacing);
    std::vector<GraphConvergence> out;
    for (const auto& v : vs) {
        GraphConvergence r;
        for (std::size_t i = 0; i < xs.size(); ++i) r.sup_difference = std::max(r.sup_difference, std::abs(v[i] - vb[i]));
        r.hausdorff = hausdorff_distance(make_upper_graph(xs, v, top, dt, x_spacing).points, gb.points);
        r.within_bound = r.hausdorff <= r.sup_difference + gb.resolution;
        out.push_back(r);
    }
    return out;
}

}  // namespace mafem
