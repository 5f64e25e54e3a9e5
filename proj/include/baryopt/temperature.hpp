#pragma once

// Temperature calculus: the analytic constants table, the truncation and
// Gibbs-tail functions, the threshold solvers producing T_o and T_delta, the
// convexity factor Ct, the structural constant A_M from flat polar
// coordinates, and the ergodicity floor for the Metropolis chain.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "baryopt/grassmann.hpp"
#include "baryopt/manifold.hpp"
#include "baryopt/objective.hpp"
#include "baryopt/special.hpp"
#include "baryopt/sphere.hpp"

namespace baryopt {

// Gaussian moments and the derived manifold constants used by the thresholds.
struct ConstantsTable {
    int n = 0;              // manifold dimension
    std::vector<double> a;  // a[k] = E|X|^k for standard normal X, k = 0..n+1
    double b_n = 0.0;       // Beta(1/2, n/2)
    double omega_n = 0.0;   // surface area of the unit sphere S^{n-1}
    double c_n = 0.0;       // omega_n A(n) / (diam * vol)
    double d_n = 0.0;       // (2/pi)^{n-1} B_n / (4 diam)
};

template <Manifold M>
ConstantsTable make_constants_table(const M& m) {
    ConstantsTable t;
    t.n = m.dim();
    t.a.resize(static_cast<std::size_t>(t.n) + 2);
    for (int k = 0; k <= t.n + 1; ++k) t.a[static_cast<std::size_t>(k)] = gauss_abs_moment(k);
    t.b_n = beta_half(t.n);
    t.omega_n = m.omega_n();
    t.c_n = t.omega_n * t.a[static_cast<std::size_t>(t.n)] / (m.diameter() * m.volume());
    t.d_n = std::pow(2.0 / std::numbers::pi, t.n - 1) * t.b_n / (4.0 * m.diameter());
    return t;
}

// f(T, m, rho) = sqrt(2/pi) (mu_max/T)^{m/2} exp(-U_rho/T)
inline double f_truncation(double t, double m_exp, double mu_max, double u_rho) {
    if (t <= 0.0) throw std::domain_error("f_truncation: T must be positive");
    return std::sqrt(2.0 / std::numbers::pi) * std::pow(mu_max / t, 0.5 * m_exp) *
           std::exp(-u_rho / t);
}

template <Manifold M>
double f_truncation(double t, double m_exp, double radius, const MinimizerProfile<M>& profile) {
    return f_truncation(t, m_exp, profile.mu_max, profile.u_delta(radius));
}

// f(T) = (2/pi) (pi/8)^{n/2} (mu_max/T)^{n/2} exp(-U_delta/T), the uniform
// bound on the Gibbs density outside B(x*, delta) for T <= T_o
inline double f_gibbs_tail(double t, int n, double mu_max, double u_delta) {
    if (t <= 0.0) throw std::domain_error("f_gibbs_tail: T must be positive");
    return (2.0 / std::numbers::pi) * std::pow(std::numbers::pi / 8.0, 0.5 * n) *
           std::pow(mu_max / t, 0.5 * n) * std::exp(-u_delta / t);
}

template <Manifold M>
double f_gibbs_tail(double t, double delta, const MinimizerProfile<M>& profile, const M& m) {
    if (delta <= 0.0 || delta >= 0.5 * m.r_cx()) {
        throw std::invalid_argument("f_gibbs_tail: delta outside (0, r_cx/2)");
    }
    return f_gibbs_tail(t, m.dim(), profile.mu_max, profile.u_delta(delta));
}

// Ct(2 kappa delta) = 2 kappa delta cot(2 kappa delta), positive convexity
// factor; the argument must stay below pi/2.
inline double ct_convexity(double delta, double kappa) {
    const double x = 2.0 * kappa * delta;
    if (x <= 0.0 || x >= 0.5 * std::numbers::pi) {
        throw std::domain_error("ct_convexity: 2*kappa*delta outside (0, pi/2)");
    }
    return x * std::cos(x) / std::sin(x);
}

// RHS of the concentration inequality:
// sqrt(2 pi) (pi/2)^{n-1} B_n^{-1} (mu_max/mu_min)^{n/2} (T/mu_min)^{1/2}
inline double wasserstein_bound(double t, int n, double b_n, double mu_min, double mu_max) {
    if (t <= 0.0) throw std::domain_error("wasserstein_bound: T must be positive");
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(0.5 * std::numbers::pi, n - 1) / b_n *
           std::pow(mu_max / mu_min, 0.5 * n) * std::sqrt(t / mu_min);
}

// p_T floor: vol(M) * inf q * exp(-sup U / T)
inline double ergodicity_floor(double t, double q_inf, double u_sup, double vol) {
    if (q_inf < 0.0) throw std::invalid_argument("ergodicity_floor: q_inf must be >= 0");
    return vol * q_inf * std::exp(-u_sup / t);
}

namespace detail {

struct Crossing {
    double t = 0.0;
    bool crossed = false;
};

// Smallest positive T where g(T) > threshold, located by a geometric scan up
// from 1e-12 followed by 200 bisection steps. Pure double arithmetic with
// fixed step counts, so results are bit-reproducible.
inline Crossing smallest_crossing(const std::function<double(double)>& g, double threshold,
                                  double t_max) {
    double lo = 1e-12;
    if (lo >= t_max) lo = t_max * 0.5;
    if (g(lo) > threshold) return {lo, true};
    double below = lo;
    double above = 0.0;
    bool found = false;
    for (double t = lo; t < t_max;) {
        t = std::min(t * 1.25, t_max);
        if (g(t) > threshold) {
            above = t;
            found = true;
            break;
        }
        below = t;
        if (t >= t_max) break;
    }
    if (!found) return {t_max, false};
    double a = below;
    double b = above;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        if (g(mid) > threshold) {
            b = mid;
        } else {
            a = mid;
        }
    }
    return {0.5 * (a + b), true};
}

}  // namespace detail

struct ToThresholds {
    double t_o1 = 0.0;
    double t_o2 = 0.0;
    double t_o = 0.0;
    bool t_o1_capped = false;  // no crossing found; value is the bracket top
    bool t_o2_capped = false;
    double threshold_o1 = 0.0;  // constants the inequalities were solved against
    double threshold_o2 = 0.0;
};

// T_o^1 = inf{T : f(T, n-2, rho) > rho^{2-n} A_{n-1}}
// T_o^2 = inf{T : f(T, n+1, rho) > (mu_max/mu_min)^{n/2} C_n}
template <Manifold M>
ToThresholds solve_T_o(const MinimizerProfile<M>& profile, const M& m,
                       const ConstantsTable& constants) {
    const int n = m.dim();
    const double rho = profile.rho;
    const double u_rho = profile.u_rho;
    const double t_max = 1e6 * std::max(1.0, profile.mu_max);

    ToThresholds out;
    out.threshold_o1 =
        std::pow(rho, 2.0 - n) * constants.a[static_cast<std::size_t>(n - 1)];
    out.threshold_o2 = std::pow(profile.mu_max / profile.mu_min, 0.5 * n) * constants.c_n;

    const auto c1 = detail::smallest_crossing(
        [&](double t) { return f_truncation(t, n - 2.0, profile.mu_max, u_rho); },
        out.threshold_o1, t_max);
    const auto c2 = detail::smallest_crossing(
        [&](double t) { return f_truncation(t, n + 1.0, profile.mu_max, u_rho); },
        out.threshold_o2, t_max);
    out.t_o1 = c1.t;
    out.t_o2 = c2.t;
    out.t_o1_capped = !c1.crossed;
    out.t_o2_capped = !c2.crossed;
    out.t_o = std::min(out.t_o1, out.t_o2);
    return out;
}

struct TdeltaThresholds {
    double t_delta1 = 0.0;
    double t_delta2 = 0.0;
    double t_delta = 0.0;
    double epsilon = 0.0;
    double threshold_delta2 = 0.0;
};

// T_delta^1: closed form of sqrt(2 pi T / mu_min) = delta^2 (mu_min/mu_max)^{n/2} D_n,
// capped at T_o. T_delta^2: crossing of the Gibbs tail bound against
// Ct(2delta) / (Ct(2delta) vol + pi A_M) over (0, T_o].
// T_delta = min of the two minus epsilon (default epsilon: 1e-3 * min).
template <Manifold M>
TdeltaThresholds solve_T_delta(double delta, std::optional<double> epsilon, double t_o,
                               const MinimizerProfile<M>& profile, const M& m,
                               const ConstantsTable& constants, double a_m) {
    if (delta <= 0.0 || delta >= 0.5 * m.r_cx()) {
        throw std::invalid_argument("solve_T_delta: delta outside (0, r_cx/2)");
    }
    const int n = m.dim();
    TdeltaThresholds out;

    const double rhs1 = delta * delta * std::pow(profile.mu_min / profile.mu_max, 0.5 * n) *
                        constants.d_n;
    out.t_delta1 =
        std::min(t_o, profile.mu_min * rhs1 * rhs1 / (2.0 * std::numbers::pi));

    const double ct = ct_convexity(delta, std::sqrt(m.kappa_sq()));
    out.threshold_delta2 = ct / (ct * m.volume() + std::numbers::pi * a_m);
    const double u_delta = profile.u_delta(delta);
    const auto c2 = detail::smallest_crossing(
        [&](double t) { return f_gibbs_tail(t, n, profile.mu_max, u_delta); },
        out.threshold_delta2, t_o);
    out.t_delta2 = c2.t;

    const double floor = std::min(out.t_delta1, out.t_delta2);
    out.epsilon = epsilon.value_or(1e-3 * floor);
    if (out.epsilon <= 0.0 || out.epsilon >= floor) {
        throw std::invalid_argument("solve_T_delta: epsilon must lie in (0, min threshold)");
    }
    out.t_delta = floor - out.epsilon;
    return out;
}

namespace detail {

// integral over the flat box [0, upper]^rank of prod |sin(lambda(a))|^mult
// by tensor-product Gauss-Legendre quadrature
inline double root_box_integral(const RootData& rd, int points_per_axis = 64) {
    const auto gl = gauss_legendre_nodes(points_per_axis);
    const double half = 0.5 * rd.box_upper;
    std::vector<std::size_t> idx(static_cast<std::size_t>(rd.rank), 0);
    std::vector<double> a(static_cast<std::size_t>(rd.rank), 0.0);
    double total = 0.0;
    for (;;) {
        double w = 1.0;
        for (int i = 0; i < rd.rank; ++i) {
            const auto& node = gl[idx[static_cast<std::size_t>(i)]];
            a[static_cast<std::size_t>(i)] = half * (node.first + 1.0);
            w *= half * node.second;
        }
        double dens = 1.0;
        for (const auto& root : rd.roots) {
            double angle = 0.0;
            for (int i = 0; i < rd.rank; ++i) {
                angle += root.coeffs[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
            }
            dens *= std::pow(std::abs(std::sin(angle)), root.multiplicity);
        }
        total += w * dens;
        int axis = 0;
        while (axis < rd.rank) {
            if (++idx[static_cast<std::size_t>(axis)] < gl.size()) break;
            idx[static_cast<std::size_t>(axis)] = 0;
            ++axis;
        }
        if (axis == rd.rank) break;
    }
    return total;
}

// A_M = vol(M) * Leb(box) / integral(box density); the quotient-measure
// normalization omega(S) = vol(M)/integral cancels the Weyl-group symmetry
// factor, so the raw box works for both rank-one spheres and Grassmannians.
inline double structural_constant_from_roots(double volume, const RootData& rd) {
    return volume * std::pow(rd.box_upper, rd.rank) / root_box_integral(rd);
}

}  // namespace detail

// S^n: rank one, single root of multiplicity n-1 on the flat segment [0, pi];
// reduces to omega_n * pi.
inline double structural_constant_A_M(const Sphere& m) {
    RootData rd;
    rd.rank = 1;
    rd.box_upper = std::numbers::pi;
    rd.roots.push_back({{1.0}, m.dim() - 1});
    return detail::structural_constant_from_roots(m.volume(), rd);
}

inline double structural_constant_A_M(const Grassmann& m) {
    return detail::structural_constant_from_roots(m.volume(), m.root_data());
}

// Full record of one temperature computation: thresholds, the constants they
// were solved against, and snapshots of the profile and manifold inputs.
struct TemperatureReport {
    double t_o1 = 0.0;
    double t_o2 = 0.0;
    double t_o = 0.0;
    bool t_o1_capped = false;
    bool t_o2_capped = false;
    double t_delta1 = 0.0;
    double t_delta2 = 0.0;
    double t_delta = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    double threshold_o1 = 0.0;
    double threshold_o2 = 0.0;
    double threshold_delta2 = 0.0;
    // profile snapshot
    double mu_min = 0.0;
    double mu_max = 0.0;
    double rho = 0.0;
    double u_rho = 0.0;
    double u_delta = 0.0;
    // manifold snapshot
    int dim = 0;
    double diameter = 0.0;
    double volume = 0.0;
    double r_cx = 0.0;
    double injectivity_radius = 0.0;
    double kappa_sq = 0.0;
    double a_m = 0.0;
    // derived constants
    double b_n = 0.0;
    double omega_n = 0.0;
    double c_n = 0.0;
    double d_n = 0.0;
};

template <Manifold M>
TemperatureReport make_temperature_report(const M& m, const MinimizerProfile<M>& profile,
                                          double delta,
                                          std::optional<double> epsilon = std::nullopt) {
    const ConstantsTable constants = make_constants_table(m);
    const double a_m = structural_constant_A_M(m);
    const auto to = solve_T_o(profile, m, constants);
    const auto td = solve_T_delta(delta, epsilon, to.t_o, profile, m, constants, a_m);

    TemperatureReport r;
    r.t_o1 = to.t_o1;
    r.t_o2 = to.t_o2;
    r.t_o = to.t_o;
    r.t_o1_capped = to.t_o1_capped;
    r.t_o2_capped = to.t_o2_capped;
    r.t_delta1 = td.t_delta1;
    r.t_delta2 = td.t_delta2;
    r.t_delta = td.t_delta;
    r.epsilon = td.epsilon;
    r.delta = delta;
    r.threshold_o1 = to.threshold_o1;
    r.threshold_o2 = to.threshold_o2;
    r.threshold_delta2 = td.threshold_delta2;
    r.mu_min = profile.mu_min;
    r.mu_max = profile.mu_max;
    r.rho = profile.rho;
    r.u_rho = profile.u_rho;
    r.u_delta = profile.u_delta(delta);
    r.dim = m.dim();
    r.diameter = m.diameter();
    r.volume = m.volume();
    r.r_cx = m.r_cx();
    r.injectivity_radius = m.injectivity_radius();
    r.kappa_sq = m.kappa_sq();
    r.a_m = a_m;
    r.b_n = constants.b_n;
    r.omega_n = constants.omega_n;
    r.c_n = constants.c_n;
    r.d_n = constants.d_n;
    return r;
}

}  // namespace baryopt
