#pragma once

#include "mafem/geometry.hpp"

#include <functional>

namespace mafem {

using ScalarField = std::function<double(const Point&)>;

/// A twice differentiable function with its exact derivatives, used for
/// manufactured solutions and error measurement.
struct SmoothFunction {
    ScalarField value;
    std::function<Point(const Point&)> gradient;
    std::function<Mat2(const Point&)> hessian;

    double operator()(const Point& x) const { return value(x); }
};

inline Mat2 cofactor(const Mat2& m) {
    Mat2 c;
    c << m(1, 1), -m(1, 0), -m(0, 1), m(0, 0);
    return c;
}

/// Frobenius inner product A : B.
inline double frobenius(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

/// Eigenvalues (min, max) of a symmetric 2x2 matrix, (tr -+ sqrt(tr^2 - 4 det)) / 2.
inline std::pair<double, double> symmetric_eigenvalues(const Mat2& m) {
    const double tr = m(0, 0) + m(1, 1);
    // tr^2 - 4 det written as a sum of squares to avoid cancellation
    const double half_gap = 0.5 * (m(0, 0) - m(1, 1));
    const double off = 0.5 * (m(0, 1) + m(1, 0));
    const double disc = std::sqrt(half_gap * half_gap + off * off);
    return {0.5 * tr - disc, 0.5 * tr + disc};
}

}  // namespace mafem
