#pragma once

// Triangulations of convex polygons: generation, uniform refinement,
// shape metrics, interior subdomains, point location and plain-text I/O.

#include "mafem/geometry.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>

namespace mafem {

using Cell = std::array<int, 3>;

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    int tag = 0;  ///< index of the polygon edge this segment lies on
};

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable conforming triangulation with per-cell size data.
class Mesh {
public:
    Mesh() = default;

    Mesh(std::vector<Point> vertices, std::vector<Cell> cells, std::vector<BoundaryEdge> boundary)
        : vertices_(std::move(vertices)), cells_(std::move(cells)), boundary_(std::move(boundary)) {
        if (cells_.empty()) throw MeshError("mesh has no cells");
        const int nv = static_cast<int>(vertices_.size());
        for (auto& c : cells_) {
            for (int v : c)
                if (v < 0 || v >= nv) throw MeshError("cell references a missing vertex");
            if (orient(vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]) < 0.0) std::swap(c[1], c[2]);
        }
        for (const auto& e : boundary_)
            if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv) throw MeshError("boundary edge references a missing vertex");
        compute_metrics();
    }

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_cells() const { return cells_.size(); }

    const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    std::array<Point, 3> cell_points(std::size_t c) const {
        const auto& t = cells_[c];
        return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
    }

    double cell_area(std::size_t c) const { return area_[c]; }
    double cell_diameter(std::size_t c) const { return hk_[c]; }
    double cell_inradius(std::size_t c) const { return rho_[c]; }
    double h() const { return h_; }
    double h_min() const { return h_min_; }

    double total_area() const {
        double s = 0.0;
        for (double a : area_) s += a;
        return s;
    }

    /// Checks conformity: every edge is shared by at most two cells and the
    /// single-cell edges are exactly the declared boundary edges.
    bool is_conforming() const {
        std::map<std::pair<int, int>, int> count;
        for (const auto& c : cells_)
            for (int i = 0; i < 3; ++i) {
                int a = c[i], b = c[(i + 1) % 3];
                if (a > b) std::swap(a, b);
                ++count[{a, b}];
            }
        std::size_t single = 0;
        for (const auto& [e, n] : count) {
            if (n > 2) return false;
            if (n == 1) ++single;
        }
        if (single != boundary_.size()) return false;
        for (const auto& e : boundary_) {
            const auto it = count.find({std::min(e.a, e.b), std::max(e.a, e.b)});
            if (it == count.end() || it->second != 1) return false;
        }
        // a vertex lying in the interior of another cell's edge would be a hanging node
        for (std::size_t v = 0; v < vertices_.size(); ++v)
            for (const auto& [e, n] : count) {
                if (static_cast<int>(v) == e.first || static_cast<int>(v) == e.second) continue;
                const Point& a = vertices_[e.first];
                const Point& b = vertices_[e.second];
                const double len = (b - a).norm();
                if (segment_distance(vertices_[v], a, b) < 1e-12 * len) return false;
            }
        return true;
    }

private:
    void compute_metrics() {
        area_.resize(cells_.size());
        hk_.resize(cells_.size());
        rho_.resize(cells_.size());
        h_ = 0.0;
        h_min_ = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            const auto p = cell_points(c);
            const double a = triangle_area(p[0], p[1], p[2]);
            const double e0 = (p[1] - p[0]).norm(), e1 = (p[2] - p[1]).norm(), e2 = (p[0] - p[2]).norm();
            area_[c] = a;
            hk_[c] = std::max({e0, e1, e2});
            rho_[c] = 2.0 * a / (e0 + e1 + e2);
            h_ = std::max(h_, hk_[c]);
            h_min_ = std::min(h_min_, hk_[c]);
        }
    }

    std::vector<Point> vertices_;
    std::vector<Cell> cells_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<double> area_, hk_, rho_;
    double h_ = 0.0;
    double h_min_ = 0.0;
};

/// Splits every cell into four similar children through edge midpoints.
inline Mesh refine_uniform(const Mesh& mesh) {
    std::vector<Point> verts = mesh.vertices();
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
        const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        auto it = mid.find(key);
        if (it != mid.end()) return it->second;
        const int id = static_cast<int>(verts.size());
        verts.push_back(0.5 * (verts[a] + verts[b]));
        mid.emplace(key, id);
        return id;
    };
    std::vector<Cell> cells;
    cells.reserve(4 * mesh.num_cells());
    for (const auto& c : mesh.cells()) {
        const int m01 = midpoint(c[0], c[1]);
        const int m12 = midpoint(c[1], c[2]);
        const int m20 = midpoint(c[2], c[0]);
        cells.push_back({c[0], m01, m20});
        cells.push_back({m01, c[1], m12});
        cells.push_back({m20, m12, c[2]});
        cells.push_back({m01, m12, m20});
    }
    std::vector<BoundaryEdge> boundary;
    boundary.reserve(2 * mesh.boundary_edges().size());
    for (const auto& e : mesh.boundary_edges()) {
        const int m = midpoint(e.a, e.b);
        boundary.push_back({e.a, m, e.tag});
        boundary.push_back({m, e.b, e.tag});
    }
    return Mesh(std::move(verts), std::move(cells), std::move(boundary));
}

/// Fan triangulation of a convex polygon from its centroid (a triangle is
/// kept as a single cell), refined uniformly until h <= h_target.
inline Mesh triangulate(const ConvexPolygon& polygon, double h_target) {
    if (!(h_target > 0.0)) throw MeshError("triangulate: h_target must be positive");
    if (polygon.size() < 3 || polygon.area() < 1e-14) throw MeshError("triangulate: degenerate polygon");
    std::vector<Point> verts = polygon.vertices();
    const int n = static_cast<int>(verts.size());
    std::vector<Cell> cells;
    std::vector<BoundaryEdge> boundary;
    for (int i = 0; i < n; ++i) boundary.push_back({i, (i + 1) % n, i});
    if (n == 3) {
        cells.push_back({0, 1, 2});
    } else {
        verts.push_back(polygon.centroid());
        for (int i = 0; i < n; ++i) cells.push_back({n, i, (i + 1) % n});
    }
    Mesh mesh(std::move(verts), std::move(cells), std::move(boundary));
    while (mesh.h() > h_target * (1.0 + 1e-12)) mesh = refine_uniform(mesh);
    return mesh;
}

struct ShapeMetrics {
    double max_aspect = 0.0;        ///< max over cells of h_K / rho_K
    double quasi_uniformity = 0.0;  ///< h / h_min
};

inline ShapeMetrics shape_metrics(const Mesh& mesh) {
    ShapeMetrics m;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        if (!(mesh.cell_area(c) > 0.0)) throw MeshError("shape_metrics: zero-area cell " + std::to_string(c));
        m.max_aspect = std::max(m.max_aspect, mesh.cell_diameter(c) / mesh.cell_inradius(c));
    }
    m.quasi_uniformity = mesh.h() / mesh.h_min();
    return m;
}

/// Inner offset of a convex polygon: the points at distance >= delta from every edge line.
inline ConvexPolygon interior_subdomain(const ConvexPolygon& polygon, double delta) {
    if (delta < 0.0) throw GeometryError("interior_subdomain: negative margin");
    if (delta == 0.0) return polygon;
    if (delta >= polygon.inradius()) throw GeometryError("interior_subdomain: margin reaches the inradius, subdomain is empty");
    std::vector<Point> out = polygon.vertices();
    const auto& v = polygon.vertices();
    const std::size_t n = v.size();
    for (std::size_t e = 0; e < n && !out.empty(); ++e) {
        const Point a = v[e];
        const Point b = v[(e + 1) % n];
        const Point t = (b - a).normalized();
        const Point nrm(-t.y(), t.x());
        const Point a2 = a + delta * nrm;
        const Point b2 = b + delta * nrm;
        out = clip_convex(out, {a2, b2, b2 + 4.0 * polygon.diameter() * nrm, a2 + 4.0 * polygon.diameter() * nrm});
    }
    if (out.size() < 3) throw GeometryError("interior_subdomain: subdomain is empty");
    return ConvexPolygon(std::move(out));
}

/// Bucket grid for locating the cell containing a point.
class CellLocator {
public:
    explicit CellLocator(const Mesh& mesh) : mesh_(&mesh) {
        lo_ = hi_ = mesh.vertex(0);
        for (const auto& p : mesh.vertices()) {
            lo_ = lo_.cwiseMin(p);
            hi_ = hi_.cwiseMax(p);
        }
        const double span = std::max((hi_ - lo_).maxCoeff(), 1e-300);
        n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_cells())) / 2.0));
        cell_ = span / n_;
        lo_ -= Point::Constant(1e-9 * span);
        buckets_.assign(static_cast<std::size_t>(n_ * n_), {});
        for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
            const auto p = mesh.cell_points(c);
            Point a = p[0].cwiseMin(p[1]).cwiseMin(p[2]);
            Point b = p[0].cwiseMax(p[1]).cwiseMax(p[2]);
            const auto [i0, j0] = index(a);
            const auto [i1, j1] = index(b);
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j) buckets_[static_cast<std::size_t>(i * n_ + j)].push_back(static_cast<int>(c));
        }
    }

    struct Hit {
        int cell = -1;
        std::array<double, 3> bary{};
    };

    /// Cell whose barycentric coordinates at p have the largest minimum;
    /// points outside the mesh by more than tol return nothing.
    std::optional<Hit> locate(const Point& p, double tol = 1e-10) const {
        const auto [i, j] = index(p);
        Hit best;
        double best_min = -std::numeric_limits<double>::infinity();
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
                const int ii = i + di, jj = j + dj;
                if (ii < 0 || jj < 0 || ii >= n_ || jj >= n_) continue;
                for (int c : buckets_[static_cast<std::size_t>(ii * n_ + jj)]) {
                    const auto b = barycentric(static_cast<std::size_t>(c), p);
                    const double m = std::min({b[0], b[1], b[2]});
                    if (m > best_min) {
                        best_min = m;
                        best = {c, b};
                    }
                }
            }
        if (best.cell < 0 || best_min < -tol) return std::nullopt;
        return best;
    }

    std::array<double, 3> barycentric(std::size_t c, const Point& p) const {
        const auto v = mesh_->cell_points(c);
        const double d = orient(v[0], v[1], v[2]);
        const double l1 = orient(v[0], p, v[2]) / d;
        const double l2 = orient(v[0], v[1], p) / d;
        return {1.0 - l1 - l2, l1, l2};
    }

private:
    std::pair<int, int> index(const Point& p) const {
        auto clampi = [&](double x) { return std::clamp(static_cast<int>(std::floor(x / cell_)), 0, n_ - 1); };
        return {clampi(p.x() - lo_.x()), clampi(p.y() - lo_.y())};
    }

    const Mesh* mesh_;
    Point lo_, hi_;
    int n_ = 1;
    double cell_ = 1.0;
    std::vector<std::vector<int>> buckets_;
};

// Plain-text format:
//   <nv>            then nv lines "x y"
//   <nc>            then nc lines "i j k" (0-based)
//   <nb>            then nb lines "i j tag"
inline void write_mesh(std::ostream& os, const Mesh& mesh) {
    os << std::setprecision(17);
    os << mesh.num_vertices() << '\n';
    for (const auto& p : mesh.vertices()) os << p.x() << ' ' << p.y() << '\n';
    os << mesh.num_cells() << '\n';
    for (const auto& c : mesh.cells()) os << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    os << mesh.boundary_edges().size() << '\n';
    for (const auto& e : mesh.boundary_edges()) os << e.a << ' ' << e.b << ' ' << e.tag << '\n';
}

inline Mesh read_mesh(std::istream& is) {
    std::size_t nv = 0, nc = 0, nb = 0;
    if (!(is >> nv)) throw MeshError("read_mesh: missing vertex count");
    std::vector<Point> verts(nv);
    for (auto& p : verts)
        if (!(is >> p.x() >> p.y())) throw MeshError("read_mesh: truncated vertex list");
    if (!(is >> nc)) throw MeshError("read_mesh: missing cell count");
    std::vector<Cell> cells(nc);
    for (auto& c : cells)
        if (!(is >> c[0] >> c[1] >> c[2])) throw MeshError("read_mesh: truncated cell list");
    if (!(is >> nb)) throw MeshError("read_mesh: missing boundary edge count");
    std::vector<BoundaryEdge> be(nb);
    for (auto& e : be)
        if (!(is >> e.a >> e.b >> e.tag)) throw MeshError("read_mesh: truncated boundary list");
    return Mesh(std::move(verts), std::move(cells), std::move(be));
}

}  // namespace mafem
