#pragma once

// Scalar special functions shared by the geometry and temperature modules:
// Legendre polynomials, absolute Gaussian moments, the Beta(1/2, n/2) family
// and unit-sphere surface areas.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace baryopt {

// Legendre polynomial P_l(t) via the three-term recurrence
// (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}.
inline double legendre_p(int l, double t) {
    if (l < 0) throw std::invalid_argument("legendre_p: negative degree");
    if (std::abs(t) > 1.0) throw std::invalid_argument("legendre_p: |t| > 1");
    if (l == 0) return 1.0;
    double pm1 = 1.0;
    double p = t;
    for (int k = 1; k < l; ++k) {
        const double pp1 = ((2.0 * k + 1.0) * t * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pp1;
    }
    return p;
}

// Absolute moment E|X|^k of a standard Gaussian: 2^{k/2} Gamma((k+1)/2) / sqrt(pi).
inline double gauss_abs_moment(int k) {
    if (k < 0) throw std::invalid_argument("gauss_abs_moment: negative order");
    return std::pow(2.0, 0.5 * k) * std::tgamma(0.5 * (k + 1)) / std::sqrt(std::numbers::pi);
}

// Beta(1/2, n/2) = Gamma(1/2) Gamma(n/2) / Gamma((n+1)/2).
inline double beta_half(int n) {
    if (n < 1) throw std::invalid_argument("beta_half: n < 1");
    return std::sqrt(std::numbers::pi) * std::tgamma(0.5 * n) / std::tgamma(0.5 * (n + 1));
}

// Surface area of the unit sphere S^{n-1} embedded in R^n: 2 pi^{n/2} / Gamma(n/2).
inline double unit_sphere_area(int n) {
    if (n < 1) throw std::invalid_argument("unit_sphere_area: n < 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
// recurrence values; deterministic to machine precision.
inline std::vector<std::pair<double, double>> gauss_legendre_nodes(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_nodes: n < 1");
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const double p = legendre_p(n, x);
            const double pm = legendre_p(n - 1, x);
            const double dp = n * (x * p - pm) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double p = legendre_p(n, x);
        const double pm = legendre_p(n - 1, x);
        const double dp = n * (x * p - pm) / (x * x - 1.0);
        out.emplace_back(x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    return out;
}

}  // namespace baryopt
