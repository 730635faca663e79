#pragma once

// Planar geometry primitives: points, convex polygons, clipping.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mafem {

using Point = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Twice the signed area of triangle (a, b, c); positive for counterclockwise order.
inline double orient(const Point& a, const Point& b, const Point& c) { return cross(b - a, c - a); }

inline double triangle_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * std::abs(orient(a, b, c));
}

/// Distance from p to the infinite line through a and b.
inline double line_distance(const Point& p, const Point& a, const Point& b) {
    return std::abs(orient(a, b, p)) / (b - a).norm();
}

inline double segment_distance(const Point& p, const Point& a, const Point& b) {
    const Point d = b - a;
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * d)).norm();
}

inline Point segment_closest(const Point& p, const Point& a, const Point& b) {
    const Point d = b - a;
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return a + t * d;
}

/// Signed area of a closed polygon (shoelace).
inline double signed_area(const std::vector<Point>& pts) {
    double s = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) s += cross(pts[i], pts[(i + 1) % n]);
    return 0.5 * s;
}

/// A convex polygon with counterclockwise vertices.
///
/// Construction normalizes orientation, drops repeated and collinear
/// vertices, and rejects non-convex or degenerate input.
class ConvexPolygon {
public:
    ConvexPolygon() = default;

    explicit ConvexPolygon(std::vector<Point> vertices) {
        if (vertices.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
        double diam = 0.0;
        for (const auto& a : vertices)
            for (const auto& b : vertices) diam = std::max(diam, (a - b).norm());
        const double tol = 1e-12 * std::max(diam, 1.0);

        // drop consecutive duplicates (including wraparound)
        std::vector<Point> v;
        for (const auto& p : vertices)
            if (v.empty() || (p - v.back()).norm() > tol) v.push_back(p);
        while (v.size() > 1 && (v.front() - v.back()).norm() <= tol) v.pop_back();
        if (v.size() < 3) throw GeometryError("polygon has fewer than 3 distinct vertices");

        if (std::abs(signed_area(v)) < 1e-14) throw GeometryError("degenerate polygon (area below 1e-14)");
        if (signed_area(v) < 0.0) std::reverse(v.begin(), v.end());

        // remove collinear vertices, then check strict convexity
        bool changed = true;
        while (changed && v.size() > 3) {
            changed = false;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const auto& a = v[(i + v.size() - 1) % v.size()];
                const auto& b = v[i];
                const auto& c = v[(i + 1) % v.size()];
                if (std::abs(orient(a, b, c)) <= tol * diam) {
                    v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                    break;
                }
            }
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& a = v[i];
            const auto& b = v[(i + 1) % v.size()];
            const auto& c = v[(i + 2) % v.size()];
            if (orient(a, b, c) <= tol * diam) throw GeometryError("polygon is not convex");
        }
        vertices_ = std::move(v);
        diameter_ = diam;
    }

    const std::vector<Point>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    const Point& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
    double diameter() const { return diameter_; }
    double area() const { return signed_area(vertices_); }

    Point centroid() const {
        // area-weighted centroid
        Point c = Point::Zero();
        const double a = area();
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = vertices_[i];
            const auto& q = vertices_[(i + 1) % n];
            c += (p + q) * cross(p, q);
        }
        return c / (6.0 * a);
    }

    /// Signed distance to the boundary, positive inside.
    double inner_distance(const Point& p) const {
        double d = std::numeric_limits<double>::infinity();
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i)
            d = std::min(d, orient(vertices_[i], vertices_[(i + 1) % n], p) / (vertices_[(i + 1) % n] - vertices_[i]).norm());
        return d;
    }

    double boundary_distance(const Point& p) const {
        double d = std::numeric_limits<double>::infinity();
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) d = std::min(d, segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
        return d;
    }

    Point nearest_boundary_point(const Point& p) const {
        Point best = vertices_[0];
        double d = std::numeric_limits<double>::infinity();
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point q = segment_closest(p, vertices_[i], vertices_[(i + 1) % n]);
            const double dq = (q - p).norm();
            if (dq < d) {
                d = dq;
                best = q;
            }
        }
        return best;
    }

    bool contains(const Point& p, double tol = 1e-12) const {
        return inner_distance(p) >= -tol * std::max(diameter_, 1.0);
    }

    /// Radius of the largest inscribed disk.
    ///
    /// The optimum of max_p min_i dist(p, edge_i) sits at a point equidistant
    /// from three edge lines, so triples are enumerated (fine for small n).
    double inradius() const {
        const std::size_t n = vertices_.size();
        double best = 0.0;
        auto try_point = [&](const Point& p) {
            if (!p.allFinite()) return;
            best = std::max(best, inner_distance(p));
        };
        std::vector<Eigen::Vector3d> lines;  // a.x + b.y + c >= 0 inside, (a,b) unit
        for (std::size_t i = 0; i < n; ++i) {
            const Point a = vertices_[i], b = vertices_[(i + 1) % n];
            const Point t = (b - a).normalized();
            const Point nrm(-t.y(), t.x());
            lines.emplace_back(nrm.x(), nrm.y(), -nrm.dot(a));
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k) {
                    // solve n_i.p + c_i = r for i,j,k in (p, r)
                    Eigen::Matrix3d m;
                    Eigen::Vector3d rhs;
                    const std::size_t idx[3] = {i, j, k};
                    for (int r = 0; r < 3; ++r) {
                        m(r, 0) = lines[idx[r]](0);
                        m(r, 1) = lines[idx[r]](1);
                        m(r, 2) = -1.0;
                        rhs(r) = -lines[idx[r]](2);
                    }
                    if (std::abs(m.determinant()) < 1e-14) continue;
                    const Eigen::Vector3d s = m.fullPivLu().solve(rhs);
                    try_point(Point(s(0), s(1)));
                }
        try_point(centroid());
        return best;
    }

private:
    std::vector<Point> vertices_;
    double diameter_ = 0.0;
};

/// Clips a convex polygon against a convex clip polygon (Sutherland-Hodgman).
/// Both inputs are counterclockwise; the result may be empty.
inline std::vector<Point> clip_convex(const std::vector<Point>& subject, const std::vector<Point>& clip) {
    std::vector<Point> out = subject;
    const std::size_t m = clip.size();
    for (std::size_t e = 0; e < m && !out.empty(); ++e) {
        const Point a = clip[e];
        const Point b = clip[(e + 1) % m];
        std::vector<Point> in;
        in.swap(out);
        const std::size_t n = in.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& p = in[i];
            const Point& q = in[(i + 1) % n];
            const double sp = orient(a, b, p);
            const double sq = orient(a, b, q);
            if (sp >= 0.0) out.push_back(p);
            if ((sp >= 0.0) != (sq >= 0.0)) {
                const double t = sp / (sp - sq);
                out.push_back(p + t * (q - p));
            }
        }
    }
    if (out.size() < 3 || std::abs(signed_area(out)) == 0.0) out.clear();
    return out;
}

}  // namespace mafem
