#pragma once

// Problem description and the built-in catalogue of manufactured problems.

#include "mafem/field.hpp"
#include "mafem/mesh.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mafem {

class ProblemError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Regularization {
    std::vector<double> epsilon_schedule;  ///< shift continuation, decreasing
    std::vector<double> truncate_M;        ///< truncation continuation, increasing
    std::optional<double> mollify_radius;
    double delta = 0.0;                    ///< subdomain margin
};

struct ProblemSpec {
    std::string name = "custom";
    ConvexPolygon polygon{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}};
    ScalarField f;
    ScalarField g;
    std::optional<SmoothFunction> exact;
    std::optional<ConvexPolygon> interior_compact;  ///< where sup errors are measured
    Regularization regularization;
    int k = 2;
    int first_level = 2;  ///< level l is the base mesh refined l times; h = 2^-l on the unit square
    int levels = 4;
};

// ---------------------------------------------------------------- named fields

namespace fields {

inline SmoothFunction p_smooth() {
    SmoothFunction u;
    u.value = [](const Point& x) { return std::exp(0.5 * x.squaredNorm()); };
    u.gradient = [](const Point& x) -> Point { return std::exp(0.5 * x.squaredNorm()) * x; };
    u.hessian = [](const Point& x) -> Mat2 {
        return std::exp(0.5 * x.squaredNorm()) * (Mat2::Identity() + x * x.transpose());
    };
    return u;
}

inline double p_smooth_f(const Point& x) {
    const double r2 = x.squaredNorm();
    return (1.0 + r2) * std::exp(r2);
}

inline SmoothFunction p_singular() {
    SmoothFunction u;
    u.value = [](const Point& x) { return -std::sqrt(2.0 - x.squaredNorm()); };
    u.gradient = [](const Point& x) -> Point { return x / std::sqrt(2.0 - x.squaredNorm()); };
    u.hessian = [](const Point& x) -> Mat2 {
        const double s = std::sqrt(2.0 - x.squaredNorm());
        return Mat2::Identity() / s + x * x.transpose() / (s * s * s);
    };
    return u;
}

inline double p_singular_f(const Point& x) {
    const double s2 = 2.0 - x.squaredNorm();
    return 2.0 / (s2 * s2);
}

/// max(0, |x - x0| - a)^2 with x0 = (0.5, 0.5), a = 0.2.
inline SmoothFunction p_degenerate() {
    static const Point x0(0.5, 0.5);
    constexpr double a = 0.2;
    SmoothFunction u;
    u.value = [](const Point& x) {
        const double r = (x - x0).norm();
        return r > a ? (r - a) * (r - a) : 0.0;
    };
    u.gradient = [](const Point& x) -> Point {
        const double r = (x - x0).norm();
        return r > a ? Point(2.0 * (r - a) / r * (x - x0)) : Point(Point::Zero());
    };
    u.hessian = [](const Point& x) -> Mat2 {
        const double r = (x - x0).norm();
        if (r <= a) return Mat2::Zero();
        const Point e = (x - x0) / r;
        const Mat2 radial = e * e.transpose();
        return 2.0 * radial + 2.0 * (r - a) / r * (Mat2::Identity() - radial);
    };
    return u;
}

inline double p_degenerate_f(const Point& x) {
    const double r = (x - Point(0.5, 0.5)).norm();
    return r > 0.2 ? 4.0 * (r - 0.2) / r : 0.0;
}

/// Convex envelope of the corner trace (1 - x)(1 - y) on the unit square.
inline SmoothFunction p_envelope() {
    SmoothFunction u;
    u.value = [](const Point& x) { return std::max(0.0, 1.0 - x.x() - x.y()); };
    u.gradient = [](const Point& x) -> Point { return x.x() + x.y() < 1.0 ? Point(-1.0, -1.0) : Point(0.0, 0.0); };
    u.hessian = [](const Point&) -> Mat2 { return Mat2::Zero(); };
    return u;
}

inline double p_envelope_g(const Point& x) { return (1.0 - x.x()) * (1.0 - x.y()); }

inline SmoothFunction quadratic() {
    SmoothFunction u;
    u.value = [](const Point& x) { return 0.5 * x.squaredNorm(); };
    u.gradient = [](const Point& x) -> Point { return x; };
    u.hessian = [](const Point&) -> Mat2 { return Mat2::Identity(); };
    return u;
}

/// sum_t c_t x^i_t y^j_t with exact derivatives.
inline SmoothFunction polynomial(std::vector<std::array<double, 3>> terms) {
    for (const auto& t : terms)
        if (t[1] < 0 || t[2] < 0 || t[1] != std::floor(t[1]) || t[2] != std::floor(t[2]))
            throw ProblemError("poly: exponents must be nonnegative integers");
    auto eval = [terms](const Point& x, int dx, int dy) {
        double s = 0.0;
        for (const auto& t : terms) {
            const int i = static_cast<int>(t[1]), j = static_cast<int>(t[2]);
            if (i < dx || j < dy) continue;
            double c = t[0];
            for (int a = 0; a < dx; ++a) c *= i - a;
            for (int b = 0; b < dy; ++b) c *= j - b;
            s += c * std::pow(x.x(), i - dx) * std::pow(x.y(), j - dy);
        }
        return s;
    };
    SmoothFunction u;
    u.value = [eval](const Point& x) { return eval(x, 0, 0); };
    u.gradient = [eval](const Point& x) -> Point { return {eval(x, 1, 0), eval(x, 0, 1)}; };
    u.hessian = [eval](const Point& x) -> Mat2 {
        Mat2 h;
        h << eval(x, 2, 0), eval(x, 1, 1), eval(x, 1, 1), eval(x, 0, 2);
        return h;
    };
    return u;
}

inline SmoothFunction constant(double c) { return polynomial({{c, 0.0, 0.0}}); }

/// What a named field means: the right-hand side, the boundary trace or the
/// exact solution of the problem of that name.
enum class Role { Rhs, Boundary, Exact };

/// Smooth function from a JSON field description:
/// {"name": ...}, {"poly": [[c, i, j], ...]} or {"constant": c}.
inline SmoothFunction smooth_from_json(const nlohmann::json& j, Role role) {
    const bool as_rhs = role == Role::Rhs;
    if (j.is_number()) return constant(j.get<double>());
    if (!j.is_object()) throw ProblemError("field must be an object or a number");
    if (j.contains("constant")) return constant(j.at("constant").get<double>());
    if (j.contains("poly")) {
        std::vector<std::array<double, 3>> terms;
        for (const auto& t : j.at("poly")) {
            if (!t.is_array() || t.size() != 3) throw ProblemError("poly terms are [coefficient, i, j]");
            terms.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
        }
        return polynomial(std::move(terms));
    }
    if (!j.contains("name")) throw ProblemError("field needs one of name, poly, constant");
    const std::string n = j.at("name").get<std::string>();
    auto wrap = [](double (*fn)(const Point&)) {
        SmoothFunction s;
        s.value = fn;
        return s;
    };
    if (n == "one") return constant(1.0);
    if (n == "zero") return constant(0.0);
    if (n == "quadratic") return as_rhs ? constant(1.0) : quadratic();
    if (n == "p_smooth") return as_rhs ? wrap(p_smooth_f) : p_smooth();
    if (n == "p_singular") return as_rhs ? wrap(p_singular_f) : p_singular();
    if (n == "p_degenerate") return as_rhs ? wrap(p_degenerate_f) : p_degenerate();
    if (n == "p_envelope") return as_rhs ? constant(0.0) : (role == Role::Exact ? p_envelope() : wrap(p_envelope_g));
    throw ProblemError("unknown field name '" + n + "'");
}

}  // namespace fields

// ---------------------------------------------------------------- catalogue

inline ConvexPolygon unit_square() { return ConvexPolygon({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}); }

inline ConvexPolygon box(double x0, double y0, double x1, double y1) {
    return ConvexPolygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

/// P-SMOOTH, P-SINGULAR, P-DEGENERATE, P-ENVELOPE, P-QUADRATIC.
inline ProblemSpec catalogue(const std::string& name) {
    ProblemSpec p;
    p.name = name;
    p.polygon = unit_square();
    if (name == "P-SMOOTH") {
        p.exact = fields::p_smooth();
        p.f = fields::p_smooth_f;
        p.interior_compact = box(0.2, 0.2, 0.8, 0.8);
    } else if (name == "P-SINGULAR") {
        p.exact = fields::p_singular();
        p.f = fields::p_singular_f;
        p.regularization.truncate_M = {8.0, 32.0, 128.0};
    } else if (name == "P-DEGENERATE") {
        p.exact = fields::p_degenerate();
        p.f = fields::p_degenerate_f;
        p.regularization.epsilon_schedule = {1.0, 0.25, 1.0 / 16.0, 1.0 / 64.0};
    } else if (name == "P-ENVELOPE") {
        p.exact = fields::p_envelope();
        p.f = [](const Point&) { return 0.0; };
        p.g = fields::p_envelope_g;
        p.regularization.epsilon_schedule = {1.0, 0.25, 1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0, 1.0 / 1024.0};
    } else if (name == "P-QUADRATIC") {
        p.exact = fields::quadratic();
        p.f = [](const Point&) { return 1.0; };
    } else {
        throw ProblemError("unknown catalogue problem '" + name + "'");
    }
    if (!p.g) p.g = p.exact->value;
    return p;
}

inline std::vector<std::string> catalogue_names() { return {"P-SMOOTH", "P-SINGULAR", "P-DEGENERATE", "P-ENVELOPE", "P-QUADRATIC"}; }

// ---------------------------------------------------------------- JSON

namespace detail {

inline std::vector<double> number_list(const nlohmann::json& j, const char* what) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ProblemError(std::string(what) + " must be a number or a list of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

inline ConvexPolygon polygon_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() < 3) throw ProblemError("polygon must be a list of at least three [x, y] pairs");
    std::vector<Point> pts;
    for (const auto& v : j) {
        if (!v.is_array() || v.size() != 2) throw ProblemError("polygon vertices are [x, y] pairs");
        pts.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    try {
        return ConvexPolygon(std::move(pts));
    } catch (const GeometryError& e) {
        throw ProblemError(std::string("polygon: ") + e.what());
    }
}

}  // namespace detail

/// Reads the problem schema; "problem": "<catalogue name>" starts from a
/// catalogue entry and the remaining keys override it.
inline ProblemSpec problem_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw ProblemError("problem file must hold a JSON object");
        ProblemSpec p = j.contains("problem") ? catalogue(j.at("problem").get<std::string>()) : ProblemSpec{};
        if (j.contains("name")) p.name = j.at("name").get<std::string>();
        if (j.contains("polygon")) p.polygon = detail::polygon_from_json(j.at("polygon"));
        if (j.contains("exact")) {
            const auto& e = j.at("exact");
            p.exact = e.is_null() ? std::nullopt : std::optional<SmoothFunction>(fields::smooth_from_json(e, fields::Role::Exact));
        }
        if (j.contains("f")) p.f = fields::smooth_from_json(j.at("f"), fields::Role::Rhs).value;
        if (j.contains("g")) p.g = fields::smooth_from_json(j.at("g"), fields::Role::Boundary).value;
        if (!p.g && p.exact) p.g = p.exact->value;
        if (!p.f) throw ProblemError("problem needs a right-hand side f");
        if (!p.g) throw ProblemError("problem needs boundary data g or an exact solution");
        if (j.contains("k")) p.k = j.at("k").get<int>();
        if (j.contains("levels")) p.levels = j.at("levels").get<int>();
        if (j.contains("first_level")) p.first_level = j.at("first_level").get<int>();
        if (j.contains("interior_compact")) p.interior_compact = detail::polygon_from_json(j.at("interior_compact"));
        if (j.contains("regularization")) {
            const auto& r = j.at("regularization");
            if (r.contains("epsilon_schedule")) p.regularization.epsilon_schedule = detail::number_list(r.at("epsilon_schedule"), "epsilon_schedule");
            if (r.contains("truncate_M")) p.regularization.truncate_M = detail::number_list(r.at("truncate_M"), "truncate_M");
            if (r.contains("mollify_radius") && !r.at("mollify_radius").is_null())
                p.regularization.mollify_radius = r.at("mollify_radius").get<double>();
            if (r.contains("delta")) p.regularization.delta = r.at("delta").get<double>();
        }
        if (p.k < 1 || p.k > 4) throw ProblemError("k must be between 1 and 4");
        if (p.levels < 1 || p.first_level < 0) throw ProblemError("levels must be positive and first_level nonnegative");
        if (p.regularization.delta < 0.0) throw ProblemError("delta must be nonnegative");
        if (p.regularization.mollify_radius && !(*p.regularization.mollify_radius > 0.0)) throw ProblemError("mollify_radius must be positive");
        for (double e : p.regularization.epsilon_schedule)
            if (e < 0.0) throw ProblemError("epsilon_schedule entries must be nonnegative");
        for (double m : p.regularization.truncate_M)
            if (!(m > 0.0)) throw ProblemError("truncate_M entries must be positive");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ProblemError(std::string("problem file: ") + e.what());
    }
}

/// Worst |det D^2 u - f| / max(1, |f|) over n quasi-random interior points.
inline double exact_consistency(const ProblemSpec& p, int n = 100, unsigned seed = 7) {
    if (!p.exact || !p.exact->hessian) throw ProblemError("consistency check needs an exact solution with derivatives");
    Point lo = p.polygon.vertex(0), hi = lo;
    for (const auto& v : p.polygon.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
    double worst = 0.0;
    for (int found = 0; found < n;) {
        const Point x(ux(rng), uy(rng));
        if (p.polygon.inner_distance(x) <= 1e-6) continue;
        ++found;
        const double f = p.f(x);
        worst = std::max(worst, std::abs(p.exact->hessian(x).determinant() - f) / std::max(1.0, std::abs(f)));
    }
    return worst;
}

}  // namespace mafem
