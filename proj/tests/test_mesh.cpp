#include "mafem/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace mafem;

namespace {

ConvexPolygon unit_square() { return ConvexPolygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

ConvexPolygon hexagon() {
    std::vector<Point> v;
    for (int i = 0; i < 6; ++i) v.emplace_back(std::cos(i * std::numbers::pi / 3), std::sin(i * std::numbers::pi / 3));
    return ConvexPolygon(v);
}

Mesh single(const Point& a, const Point& b, const Point& c) {
    return Mesh({a, b, c}, {Cell{0, 1, 2}}, {{0, 1, 0}, {1, 2, 1}, {2, 0, 2}});
}

void expect_valid(const Mesh& m, double area) {
    EXPECT_TRUE(m.is_conforming());
    EXPECT_NEAR(m.total_area(), area, 1e-12 * area);
    for (std::size_t c = 0; c < m.num_cells(); ++c) EXPECT_GT(m.cell_area(c), 0.0);
}

}  // namespace

TEST(Triangulate, SingleTriangleIsOneCell) {
    const Mesh m = triangulate(ConvexPolygon({{0, 0}, {1, 0}, {0, 1}}), 2.0);
    EXPECT_EQ(m.num_cells(), 1u);
    EXPECT_NEAR(m.total_area(), 0.5, 1e-15);
}

TEST(Triangulate, UnitSquareConservesArea) {
    for (double h : {2.0, 0.5, 0.3, 0.1, 0.04}) {
        const Mesh m = triangulate(unit_square(), h);
        expect_valid(m, 1.0);
        EXPECT_LE(m.h(), h + 1e-14);
    }
}

TEST(Triangulate, HexagonArea) {
    const Mesh m = triangulate(hexagon(), 0.2);
    EXPECT_NEAR(m.total_area(), 3.0 * std::sqrt(3.0) / 2.0, 1e-10);
    expect_valid(m, 3.0 * std::sqrt(3.0) / 2.0);
}

TEST(Triangulate, RejectsNonPositiveTarget) {
    EXPECT_THROW(triangulate(unit_square(), 0.0), MeshError);
    EXPECT_THROW(triangulate(unit_square(), -1.0), MeshError);
}

TEST(Refine, OneCellToFour) {
    const Mesh m = single({0, 0}, {1, 0}, {0, 1});
    const Mesh r = refine_uniform(m);
    EXPECT_EQ(r.num_cells(), 4u);
    expect_valid(r, 0.5);
    EXPECT_EQ(r.boundary_edges().size(), 6u);
}

TEST(Refine, EquilateralChildrenKeepRatio) {
    const Mesh m = single({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
    const Mesh r = refine_uniform(m);
    for (std::size_t c = 0; c < r.num_cells(); ++c) {
        EXPECT_NEAR(r.cell_diameter(c), 0.5, 1e-14);
        EXPECT_NEAR(r.cell_diameter(c) / r.cell_inradius(c), 2.0 * std::sqrt(3.0), 1e-12);
    }
}

TEST(Refine, TwiceGivesSixteenTimesCells) {
    const Mesh m = triangulate(hexagon(), 10.0);
    const Mesh r = refine_uniform(refine_uniform(m));
    EXPECT_EQ(r.num_cells(), 16 * m.num_cells());
    EXPECT_NEAR(r.h(), m.h() / 4.0, 1e-12);
    expect_valid(r, m.total_area());
}

TEST(ShapeMetrics, AnalyticRatios) {
    const ShapeMetrics eq = shape_metrics(single({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}));
    EXPECT_NEAR(eq.max_aspect, 2.0 * std::sqrt(3.0), 1e-12);
    // r = (a + b - c) / 2 for legs a = b = 1
    const double r = (2.0 - std::sqrt(2.0)) / 2.0;
    const ShapeMetrics ri = shape_metrics(single({0, 0}, {1, 0}, {0, 1}));
    EXPECT_NEAR(ri.max_aspect, std::sqrt(2.0) / r, 1e-12);
    EXPECT_NEAR(ri.max_aspect, 2.0 + 2.0 * std::sqrt(2.0), 1e-12);
    // square fans are congruent right isosceles cells at every level
    const ShapeMetrics sq = shape_metrics(refine_uniform(triangulate(unit_square(), 10.0)));
    EXPECT_NEAR(sq.quasi_uniformity, 1.0, 1e-12);
}

TEST(ShapeMetrics, ZeroAreaCellRejected) {
    const Mesh flat({{0, 0}, {1, 0}, {2, 0}}, {Cell{0, 1, 2}}, {});
    EXPECT_THROW(shape_metrics(flat), MeshError);
}

TEST(InteriorSubdomain, SquareOffset) {
    const ConvexPolygon s = interior_subdomain(unit_square(), 0.1);
    EXPECT_NEAR(s.area(), 0.64, 1e-14);
    for (const auto& v : s.vertices()) {
        EXPECT_NEAR(std::min({v.x(), v.y(), 1 - v.x(), 1 - v.y()}), 0.1, 1e-14);
        EXPECT_NEAR(unit_square().boundary_distance(v), 0.1, 1e-14);
    }
}

TEST(InteriorSubdomain, ZeroMarginIsIdentity) {
    const ConvexPolygon h = hexagon();
    const ConvexPolygon s = interior_subdomain(h, 0.0);
    ASSERT_EQ(s.size(), h.size());
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ((s.vertex(i) - h.vertex(i)).norm(), 0.0);
}

TEST(InteriorSubdomain, TriangleOffsetDistances) {
    const ConvexPolygon t({{0, 0}, {4, 0}, {0, 4}});
    const ConvexPolygon s = interior_subdomain(t, 0.5);
    for (const auto& v : s.vertices())
        for (std::size_t e = 0; e < t.size(); ++e)
            EXPECT_GE(line_distance(v, t.vertex(e), t.vertex((e + 1) % t.size())), 0.5 - 1e-12);
    EXPECT_NEAR(t.boundary_distance(s.vertex(0)), 0.5, 1e-12);
}

TEST(InteriorSubdomain, MarginAtInradiusRejected) {
    EXPECT_THROW(interior_subdomain(unit_square(), 0.5), GeometryError);
    EXPECT_THROW(interior_subdomain(unit_square(), -0.1), GeometryError);
}

TEST(CellLocator, FindsContainingCell) {
    const Mesh m = triangulate(hexagon(), 0.15);
    const CellLocator loc(m);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const ConvexPolygon h = hexagon();
    int found = 0;
    for (int i = 0; i < 500; ++i) {
        const Point p(u(rng), u(rng));
        const auto hit = loc.locate(p);
        if (!h.contains(p)) {
            if (h.inner_distance(p) < -1e-9) {
                EXPECT_FALSE(hit.has_value());
            }
            continue;
        }
        ASSERT_TRUE(hit.has_value());
        ++found;
        const auto b = loc.barycentric(hit->cell, p);
        const auto pts = m.cell_points(hit->cell);
        const Point back = b[0] * pts[0] + b[1] * pts[1] + b[2] * pts[2];
        EXPECT_NEAR((back - p).norm(), 0.0, 1e-13);
        for (double bi : b) EXPECT_GE(bi, -1e-10);
    }
    EXPECT_GT(found, 300);
}

TEST(MeshIo, RoundTrip) {
    const Mesh m = triangulate(hexagon(), 0.4);
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    ASSERT_EQ(r.num_vertices(), m.num_vertices());
    ASSERT_EQ(r.num_cells(), m.num_cells());
    for (std::size_t i = 0; i < m.num_vertices(); ++i) EXPECT_EQ(r.vertices()[i], m.vertices()[i]);
    EXPECT_EQ(r.cells(), m.cells());
    std::stringstream bad("3\n0 0\n1 0\n");
    EXPECT_THROW(read_mesh(bad), MeshError);
}

TEST(MeshInvariants, EveryGeneratedMeshConformsAndConservesArea) {
    for (const ConvexPolygon& p : {unit_square(), hexagon(), ConvexPolygon({{0, 0}, {4, 0}, {0, 4}})}) {
        Mesh m = triangulate(p, 10.0);
        for (int l = 0; l < 4; ++l) {
            expect_valid(m, p.area());
            m = refine_uniform(m);
        }
    }
}
