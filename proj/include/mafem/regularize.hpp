#pragma once

// Data regularization: mollification, truncation, positive shift and
// sampled bounds of the right-hand side.

#include "mafem/field.hpp"
#include "mafem/quadrature.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace mafem {

class RegularizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sampled bounds c0 <= f <= c1.
struct DataBounds {
    double c0 = 0.0;
    double c1 = 0.0;
    bool degenerate = false;  ///< sampled minimum below 1e-12
};

namespace detail {

inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

}  // namespace detail

/// Halton (2, 3) points inside the polygon, by rejection from its bounding box.
inline std::vector<Point> halton_samples(const ConvexPolygon& polygon, int n) {
    Point lo = polygon.vertex(0), hi = polygon.vertex(0);
    for (const auto& p : polygon.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t i = 1; static_cast<int>(out.size()) < n; ++i) {
        const Point p(lo.x() + (hi.x() - lo.x()) * detail::radical_inverse(i, 2),
                      lo.y() + (hi.y() - lo.y()) * detail::radical_inverse(i, 3));
        if (polygon.inner_distance(p) > 0.0) out.push_back(p);
    }
    return out;
}

inline DataBounds validate_bounds(const ScalarField& f, const ConvexPolygon& polygon, int n_samples) {
    if (n_samples < 100) throw RegularizeError("validate_bounds: need at least 100 samples");
    DataBounds b;
    b.c0 = std::numeric_limits<double>::infinity();
    b.c1 = -std::numeric_limits<double>::infinity();
    for (const auto& p : halton_samples(polygon, n_samples)) {
        const double v = f(p);
        if (!std::isfinite(v)) throw RegularizeError("validate_bounds: non-finite value at a sample point");
        b.c0 = std::min(b.c0, v);
        b.c1 = std::max(b.c1, v);
    }
    b.degenerate = b.c0 < 1e-12;
    return b;
}

/// f_M = f where f <= M and 0 elsewhere (zero, not M).
inline ScalarField truncate(ScalarField f, double M) {
    if (!(M > 0.0)) throw RegularizeError("truncate: M must be positive");
    return [f = std::move(f), M](const Point& x) {
        const double v = f(x);
        return v <= M ? v : 0.0;
    };
}

inline ScalarField shift(ScalarField f, double eps) {
    if (!(eps > 0.0)) throw RegularizeError("shift: epsilon must be positive");
    return [f = std::move(f), eps](const Point& x) { return f(x) + eps; };
}

/// Convolution with the bump exp(-1/(1 - |z/r|^2)) on the disk of radius r.
///
/// The field is extended outside the polygon by its value at the nearest
/// boundary point. The kernel is normalized on the same polar product rule
/// used for the convolution, so the discrete weights form a probability
/// vector: constants are reproduced exactly and inf f <= f_m <= sup f.
class Mollifier {
public:
    Mollifier(ScalarField field, double radius, ConvexPolygon polygon, int radial_points = 12, int angular_points = 24)
        : field_(std::move(field)), radius_(radius), polygon_(std::move(polygon)) {
        if (!(radius > 0.0)) throw RegularizeError("mollify: radius must be positive");
        const LineRule g = gauss_legendre(radial_points);
        double mass = 0.0;
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            const double s = g.points[i];
            const double bump = std::exp(-1.0 / (1.0 - s * s));
            for (int j = 0; j < angular_points; ++j) {
                const double th = 2.0 * std::numbers::pi * (j + 0.5) / angular_points;
                const double w = g.weights[i] * s * bump;
                offsets_.emplace_back(radius * s * std::cos(th), radius * s * std::sin(th));
                weights_.push_back(w);
                mass += w;
            }
        }
        for (double& w : weights_) w /= mass;
    }

    double operator()(const Point& x) const {
        // sum w_i (f(y_i) - f(x)) added to f(x): exact on constants
        const double fx = extended(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] * (extended(x + offsets_[i]) - fx);
        return fx + acc;
    }

    double radius() const { return radius_; }

private:
    double extended(const Point& y) const {
        return polygon_.inner_distance(y) >= 0.0 ? field_(y) : field_(polygon_.nearest_boundary_point(y));
    }

    ScalarField field_;
    double radius_;
    ConvexPolygon polygon_;
    std::vector<Point> offsets_;
    std::vector<double> weights_;
};

inline ScalarField mollify(ScalarField field, double radius, const ConvexPolygon& polygon) {
    auto m = std::make_shared<const Mollifier>(std::move(field), radius, polygon);
    return [m](const Point& x) { return (*m)(x); };
}

/// Which regularization steps to apply, in the order truncate, shift, mollify.
struct RegularizationPlan {
    std::optional<double> truncate_M;
    std::optional<double> shift_epsilon;
    std::optional<double> mollify_radius;  ///< r_m = 1/m
};

struct RegularizedData {
    ScalarField f_m;
    ScalarField g_m;
    RegularizationPlan applied;
    DataBounds bounds;  ///< sampled bounds of f_m (c2, c3 when mollified)
    std::vector<std::string> log;
};

inline RegularizedData regularize(ScalarField f, ScalarField g, const ConvexPolygon& polygon, const RegularizationPlan& plan,
                                  int n_samples = 2000) {
    RegularizedData out;
    out.applied = plan;
    if (plan.truncate_M) {
        f = truncate(std::move(f), *plan.truncate_M);
        out.log.push_back("truncate M=" + std::to_string(*plan.truncate_M));
    }
    if (plan.shift_epsilon && *plan.shift_epsilon > 0.0) {
        f = shift(std::move(f), *plan.shift_epsilon);
        out.log.push_back("shift epsilon=" + std::to_string(*plan.shift_epsilon));
    }
    if (plan.mollify_radius) {
        f = mollify(std::move(f), *plan.mollify_radius, polygon);
        g = mollify(std::move(g), *plan.mollify_radius, polygon);
        out.log.push_back("mollify radius=" + std::to_string(*plan.mollify_radius));
    }
    out.f_m = std::move(f);
    out.g_m = std::move(g);
    out.bounds = validate_bounds(out.f_m, polygon, n_samples);
    return out;
}

}  // namespace mafem
