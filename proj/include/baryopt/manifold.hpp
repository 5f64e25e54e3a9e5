#pragma once

// Manifold interface shared by the sphere and Grassmann implementations,
// plus the finite-difference sectional-curvature probe used to certify the
// stored curvature constants.

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>

namespace baryopt {

// Raised by log_map when the target is numerically in the cut locus of the
// base point; callers choose the fallback (tie-break or drop).
struct CutLocusError : std::runtime_error {
    explicit CutLocusError(const std::string& what) : std::runtime_error(what) {}
};

template <typename M>
concept Manifold = requires(const M& m, const typename M::Point& x, const typename M::Tangent& v,
                            double t) {
    typename M::Point;
    typename M::Tangent;
    { m.dim() } -> std::convertible_to<int>;
    { m.kappa_sq() } -> std::convertible_to<double>;
    { m.r_cx() } -> std::convertible_to<double>;
    { m.diameter() } -> std::convertible_to<double>;
    { m.volume() } -> std::convertible_to<double>;
    { m.omega_n() } -> std::convertible_to<double>;
    { m.injectivity_radius() } -> std::convertible_to<double>;
    { m.distance(x, x) } -> std::convertible_to<double>;
    { m.exp_map(x, v) } -> std::same_as<typename M::Point>;
    { m.log_map(x, x) } -> std::same_as<typename M::Tangent>;
    { m.geodesic_interpolate(x, x, t) } -> std::same_as<typename M::Point>;
    { m.geodesic_symmetry(x, x) } -> std::same_as<typename M::Point>;
    { m.norm(v) } -> std::convertible_to<double>;
    { m.inner(v, v) } -> std::convertible_to<double>;
    { m.scale_tangent(v, t) } -> std::same_as<typename M::Tangent>;
};

// Finite-difference sectional curvature of span(u, v) at the base of u:
// d^2(exp(t u), exp(t v)) = 2 t^2 - (K/3) t^4 + O(t^6) for orthonormal u, v,
// with the t^4 estimate Richardson-extrapolated in t to kill the next term
// (the spaces here are locally symmetric, so the expansion is even in t).
template <Manifold M>
double sectional_curvature_probe(const M& m, const typename M::Tangent& u,
                                 const typename M::Tangent& v) {
    const double nu = m.norm(u);
    const double nv = m.norm(v);
    const double ip = m.inner(u, v);
    if (nu < 1e-8 || nv < 1e-8 || std::abs(nu - 1.0) > 1e-8 || std::abs(nv - 1.0) > 1e-8 ||
        std::abs(ip) > 1e-8) {
        throw std::invalid_argument("sectional_curvature_probe: u, v must be orthonormal");
    }
    auto estimate = [&](double t) {
        const auto pu = m.exp_map(u.base, m.scale_tangent(u, t));
        const auto pv = m.exp_map(v.base, m.scale_tangent(v, t));
        const double d = m.distance(pu, pv);
        return 3.0 * (2.0 * t * t - d * d) / (t * t * t * t);
    };
    const double t = 1e-2;
    const double k1 = estimate(t);
    const double k2 = estimate(0.5 * t);
    return (4.0 * k2 - k1) / 3.0;
}

}  // namespace baryopt
