#pragma once

// Objective functions U: M -> R, the three shipped instances, and numerical
// estimation of the minimizer data (Hessian interval, sandwich radius rho,
// tail infima U_rho / U_delta) that the temperature calculus consumes.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "baryopt/grassmann.hpp"
#include "baryopt/manifold.hpp"
#include "baryopt/random.hpp"
#include "baryopt/special.hpp"
#include "baryopt/sphere.hpp"

namespace baryopt {

template <Manifold M>
struct Objective {
    std::function<double(const typename M::Point&)> eval_fn;
    std::optional<typename M::Point> known_minimizer;
    std::string name;

    double eval(const typename M::Point& x) const {
        const double u = eval_fn(x);
        if (!std::isfinite(u)) throw std::runtime_error("Objective '" + name + "': non-finite value");
        return u;
    }
};

// U(x) = -P_9(x^3) on S^2, global minimizer at the north pole.
inline Objective<Sphere> objective_legendre_sphere() {
    Objective<Sphere> obj;
    obj.eval_fn = [](const Sphere::Point& x) { return -legendre_p(9, std::clamp(x.coords[2], -1.0, 1.0)); };
    Eigen::VectorXd north(3);
    north << 0.0, 0.0, 1.0;
    obj.known_minimizer = Sphere::Point{north};
    obj.name = "legendre9";
    return obj;
}

// U(x) = -Re tr(C x) on Gr(k, C^n); the minimizer is the projector onto the
// span of the top-k eigenvectors of C.
inline Objective<Grassmann> objective_grassmann_trace(const Grassmann& m,
                                                      const Eigen::MatrixXcd& c) {
    const int n = m.ambient_dim();
    const int k = m.subspace_dim();
    if (c.rows() != n || c.cols() != n) {
        throw std::invalid_argument("objective_grassmann_trace: C has wrong dimensions");
    }
    if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("objective_grassmann_trace: C not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
    for (int i = 0; i + 1 < n; ++i) {
        if (es.eigenvalues()[i + 1] - es.eigenvalues()[i] < 1e-8) {
            throw std::invalid_argument("objective_grassmann_trace: repeated eigenvalues");
        }
    }
    Objective<Grassmann> obj;
    const Eigen::MatrixXcd cc = 0.5 * (c + c.adjoint());
    obj.eval_fn = [cc](const Grassmann::Point& x) {
        return -(cc.cwiseProduct(x.coords.conjugate())).sum().real();
    };
    obj.known_minimizer = m.span_point(es.eigenvectors().rightCols(k));
    obj.name = "grassmann_trace";
    return obj;
}

// Rotation of R^p taking unit vector a to unit vector b (valid when a != -b).
inline Eigen::MatrixXd rotation_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double c = a.dot(b);
    if (c <= -1.0 + 1e-12) {
        throw std::invalid_argument("rotation_between: endpoints are antipodal");
    }
    const Eigen::VectorXd s = a + b;
    const auto p = a.size();
    return Eigen::MatrixXd::Identity(p, p) - s * s.transpose() / (1.0 + c) +
           2.0 * b * a.transpose();
}

// U(x) = U_o(g^{-1} x) on the sphere, g orthogonal; minimum transported to g o.
inline Objective<Sphere> objective_transported(const Sphere& m, const Objective<Sphere>& base,
                                               const Eigen::MatrixXd& g) {
    const int p = m.ambient_dim();
    if (g.rows() != p || g.cols() != p) {
        throw std::invalid_argument("objective_transported: rotation has wrong dimensions");
    }
    if ((g * g.transpose() - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("objective_transported: matrix not orthogonal");
    }
    Objective<Sphere> obj;
    const Eigen::MatrixXd ginv = g.transpose();
    auto base_eval = base.eval_fn;
    obj.eval_fn = [ginv, base_eval](const Sphere::Point& x) {
        Eigen::VectorXd y = ginv * x.coords;
        y.normalize();
        return base_eval(Sphere::Point{y});
    };
    if (base.known_minimizer) {
        Eigen::VectorXd moved = g * base.known_minimizer->coords;
        moved.normalize();
        obj.known_minimizer = Sphere::Point{moved};
    }
    obj.name = base.name + "_transported";
    return obj;
}

// U(x) = U_o(u^H x u) on the Grassmannian, u unitary; minimum at u o u^H.
inline Objective<Grassmann> objective_transported(const Grassmann& m,
                                                  const Objective<Grassmann>& base,
                                                  const Eigen::MatrixXcd& u) {
    const int n = m.ambient_dim();
    if (u.rows() != n || u.cols() != n) {
        throw std::invalid_argument("objective_transported: unitary has wrong dimensions");
    }
    if ((u * u.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("objective_transported: matrix not unitary");
    }
    Objective<Grassmann> obj;
    const Eigen::MatrixXcd uh = u.adjoint();
    const Eigen::MatrixXcd uu = u;
    auto base_eval = base.eval_fn;
    obj.eval_fn = [uh, uu, base_eval](const Grassmann::Point& x) {
        return base_eval(Grassmann::Point{uh * x.coords * uu});
    };
    if (base.known_minimizer) {
        obj.known_minimizer = Grassmann::Point{uu * base.known_minimizer->coords * uh};
    }
    obj.name = base.name + "_transported";
    return obj;
}

// Minimizer data for the temperature calculus. u_delta(d) is the estimated
// infimum of U - U(x*) outside the ball of radius d, nondecreasing in d.
template <Manifold M>
struct MinimizerProfile {
    typename M::Point x_star;
    double mu_min = 0.0;
    double mu_max = 0.0;
    double rho = 0.0;
    double u_rho = 0.0;
    std::vector<double> hessian_eigenvalues;
    std::function<double(double)> u_delta;
};

struct ProfileOptions {
    double pad = 0.05;        // open-interval padding around the Hessian spectrum
    double fd_step = 1e-4;    // normal-coordinate central-difference step
    int ball_samples = 10000; // sandwich check sample count per candidate rho
    int tail_samples = 1000000;  // uniform cloud size for U_delta estimation
    std::uint64_t seed = 2024;
};

namespace detail {

// second-order central differences in normal coordinates at x_star
template <Manifold M>
Eigen::MatrixXd hessian_fd(const M& m, const Objective<M>& obj, const typename M::Point& x_star,
                           const std::vector<typename M::Tangent>& basis, double h) {
    const int d = static_cast<int>(basis.size());
    const double u0 = obj.eval(x_star);
    Eigen::MatrixXd hess(d, d);
    auto at = [&](const typename M::Tangent& v) { return obj.eval(m.exp_map(x_star, v)); };
    for (int a = 0; a < d; ++a) {
        const double up = at(m.scale_tangent(basis[a], h));
        const double dn = at(m.scale_tangent(basis[a], -h));
        hess(a, a) = (up - 2.0 * u0 + dn) / (h * h);
    }
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            auto combo = [&](double sa, double sb) {
                auto v = basis[a];
                v.vec = sa * h * basis[a].vec + sb * h * basis[b].vec;
                return at(v);
            };
            const double val =
                (combo(1, 1) + combo(-1, -1) - combo(1, -1) - combo(-1, 1)) / (4.0 * h * h);
            hess(a, b) = val;
            hess(b, a) = val;
        }
    }
    return hess;
}

// deterministic compass search for the constrained minimum outside the ball
template <Manifold M>
double refine_outside_ball(const M& m, const Objective<M>& obj, const typename M::Point& x_star,
                           typename M::Point x, double delta) {
    double best = obj.eval(x);
    double step = 0.05;
    int evals = 0;
    while (step > 1e-7 && evals < 20000) {
        bool improved = false;
        for (const auto& e : m.tangent_basis(x)) {
            for (double sgn : {1.0, -1.0}) {
                const auto cand = m.exp_map(x, m.scale_tangent(e, sgn * step));
                ++evals;
                if (m.distance(cand, x_star) < delta) continue;
                const double u = obj.eval(cand);
                if (u < best - 1e-15) {
                    best = u;
                    x = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

}  // namespace detail

// Estimates the Hessian interval, sandwich radius and tail infima of U at its
// known minimizer. The tail infima come from a fixed uniform cloud plus a
// constrained local refinement; the refinement improvement is subtracted once
// more, so the estimate errs low (the safe direction for temperatures).
template <Manifold M>
MinimizerProfile<M> estimate_minimizer_profile(const M& m, const Objective<M>& obj,
                                               const typename M::Point& x_star,
                                               const ProfileOptions& opt = {}) {
    MinimizerProfile<M> profile;
    profile.x_star = x_star;
    const double u_star = obj.eval(x_star);

    const auto basis = m.tangent_basis(x_star);
    const Eigen::MatrixXd hess = detail::hessian_fd(m, obj, x_star, basis, opt.fd_step);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (hess + hess.transpose()));
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_max = es.eigenvalues().maxCoeff();
    if (lam_min <= 0.0) {
        throw std::runtime_error(
            "estimate_minimizer_profile: nonpositive Hessian eigenvalue estimate " +
            std::to_string(lam_min) + "; x_star is not a nondegenerate minimum");
    }
    profile.hessian_eigenvalues.assign(es.eigenvalues().data(),
                                       es.eigenvalues().data() + es.eigenvalues().size());
    profile.mu_min = lam_min * (1.0 - opt.pad);
    profile.mu_max = lam_max * (1.0 + opt.pad);

    // shrink rho until the quadratic sandwich holds on seeded ball samples,
    // then bisect back toward the last failing radius; without the
    // refinement the result would be an artifact of the halving grid, and
    // the temperature thresholds depend on rho exponentially through u_rho
    CounterRng ball_rng(opt.seed, 1);
    const double mu_min = profile.mu_min;
    const double mu_max = profile.mu_max;
    auto sandwich_holds = [&](double radius) {
        CounterRng rng = ball_rng;
        for (int i = 0; i < opt.ball_samples; ++i) {
            const double r = radius * uniform_open(rng);
            const auto dir = m.random_unit_tangent(rng, x_star);
            const auto x = m.exp_map(x_star, m.scale_tangent(dir, r));
            const double d = m.distance(x_star, x);
            const double gap = 2.0 * (obj.eval(x) - u_star);
            if (gap < mu_min * d * d - 1e-12 || gap > mu_max * d * d + 1e-12) return false;
        }
        return true;
    };
    double rho = std::min(m.injectivity_radius(), m.r_cx());
    if (!sandwich_holds(rho)) {
        double hi = rho;
        for (;;) {
            rho *= 0.5;
            if (rho < 1e-6) {
                throw std::runtime_error("estimate_minimizer_profile: sandwich radius collapsed");
            }
            if (sandwich_holds(rho)) break;
            hi = rho;
        }
        // keep the verified endpoint, not the midpoint, so the returned
        // radius always passed the sampled check
        while (hi - rho > 1e-4 * rho) {
            const double mid = 0.5 * (rho + hi);
            if (sandwich_holds(mid)) {
                rho = mid;
            } else {
                hi = mid;
            }
        }
    }
    profile.rho = rho;

    // fixed uniform cloud of (distance, U - U*) pairs, sorted by distance with
    // suffix minima for O(log N) tail queries at any delta
    auto cloud = std::make_shared<std::vector<std::pair<double, double>>>();
    cloud->reserve(static_cast<std::size_t>(opt.tail_samples));
    auto arg_cloud = std::make_shared<std::vector<typename M::Point>>();
    {
        CounterRng rng(opt.seed, 2);
        for (int i = 0; i < opt.tail_samples; ++i) {
            const auto z = m.random_uniform_point(rng);
            cloud->emplace_back(m.distance(x_star, z), obj.eval(z) - u_star);
            arg_cloud->push_back(z);
        }
        std::vector<std::size_t> order(cloud->size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return (*cloud)[a].first < (*cloud)[b].first; });
        auto sorted_cloud = std::make_shared<std::vector<std::pair<double, double>>>();
        auto sorted_args = std::make_shared<std::vector<typename M::Point>>();
        sorted_cloud->reserve(cloud->size());
        sorted_args->reserve(cloud->size());
        for (auto idx : order) {
            sorted_cloud->push_back((*cloud)[idx]);
            sorted_args->push_back((*arg_cloud)[idx]);
        }
        cloud = sorted_cloud;
        arg_cloud = sorted_args;
    }
    auto suffix_argmin = std::make_shared<std::vector<std::size_t>>(cloud->size());
    {
        std::size_t best = cloud->size() - 1;
        for (std::size_t i = cloud->size(); i-- > 0;) {
            if ((*cloud)[i].second < (*cloud)[best].second) best = i;
            (*suffix_argmin)[i] = best;
        }
    }

    const M manifold = m;
    const Objective<M> objective = obj;
    const typename M::Point star = x_star;
    profile.u_delta = [manifold, objective, star, cloud, arg_cloud, suffix_argmin](double delta) {
        if (delta <= 0.0) return 0.0;
        const auto it = std::lower_bound(
            cloud->begin(), cloud->end(), delta,
            [](const std::pair<double, double>& p, double d) { return p.first < d; });
        if (it == cloud->end()) {
            throw std::runtime_error("u_delta: no samples outside the requested ball");
        }
        const std::size_t first = static_cast<std::size_t>(it - cloud->begin());
        const std::size_t best = (*suffix_argmin)[first];
        const double sampled = (*cloud)[best].second;
        const double refined =
            detail::refine_outside_ball(manifold, objective, star, (*arg_cloud)[best], delta) -
            objective.eval(star);
        // subtract the refinement improvement once more: errs low, never negative
        return std::max(0.0, 2.0 * refined - sampled);
    };
    profile.u_rho = profile.u_delta(rho);
    return profile;
}

}  // namespace baryopt
