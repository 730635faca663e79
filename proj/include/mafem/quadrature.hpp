#pragma once

// Gauss-Legendre and collapsed-product triangle quadrature.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mafem {

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
};

inline LineRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
    LineRule r;
    r.points.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = n == 1 ? x : p1;
            const double pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double pn = n == 1 ? x : p1;
        const double pnm1 = n == 1 ? 1.0 : p0;
        dp = n * (x * pn - pnm1) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.points[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        r.weights[static_cast<std::size_t>(i)] = 0.5 * w;
    }
    return r;
}

/// Quadrature on the reference triangle, in barycentric coordinates.
///
/// Weights sum to 1: integrate over a cell K as |K| * sum_q w_q f(x_q).
struct Quadrature {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int order = 0;

    std::size_t size() const { return weights.size(); }
};

/// Collapsed (Duffy) tensor Gauss rule exact for polynomials of total degree <= order.
inline Quadrature triangle_rule(int order) {
    if (order < 0) throw std::invalid_argument("triangle_rule: negative order");
    // integrand degree in the collapsed variable grows by one (Jacobian 1 - s)
    const int n = (order + 3) / 2;
    const LineRule g = gauss_legendre(n);
    Quadrature q;
    q.order = order;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double s = g.points[static_cast<std::size_t>(i)];
            const double t = g.points[static_cast<std::size_t>(j)];
            const double x = s;
            const double y = (1.0 - s) * t;
            q.points.push_back({1.0 - x - y, x, y});
            q.weights.push_back(2.0 * g.weights[static_cast<std::size_t>(i)] * g.weights[static_cast<std::size_t>(j)] *
                                (1.0 - s));
        }
    return q;
}

}  // namespace mafem
