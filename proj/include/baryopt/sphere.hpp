#pragma once

// Unit sphere S^n embedded in R^{n+1}. Points are unit vectors; tangents are
// ambient vectors orthogonal to their base point. All operations are pure.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "baryopt/manifold.hpp"
#include "baryopt/random.hpp"
#include "baryopt/special.hpp"

namespace baryopt {

class Sphere {
  public:
    struct Point {
        Eigen::VectorXd coords;
    };
    struct Tangent {
        Point base;
        Eigen::VectorXd vec;
    };

    explicit Sphere(int n) : n_(n) {
        if (n < 2) throw std::invalid_argument("Sphere: n >= 2 required (simply connected)");
    }

    int dim() const { return n_; }
    int ambient_dim() const { return n_ + 1; }
    double kappa_sq() const { return 1.0; }
    double r_cx() const { return 0.5 * std::numbers::pi; }
    double diameter() const { return std::numbers::pi; }
    double injectivity_radius() const { return std::numbers::pi; }
    // Riemannian volume of S^n = surface area of the unit n-sphere in R^{n+1}.
    double volume() const { return unit_sphere_area(n_ + 1); }
    // surface area of the unit S^{n-1}, the direction space at a point
    double omega_n() const { return unit_sphere_area(n_); }

    Point make_point(Eigen::VectorXd coords) const {
        check_dims(coords.size());
        Point p{std::move(coords)};
        p.coords.normalize();
        return p;
    }

    void check_point(const Point& x) const {
        check_dims(x.coords.size());
        if (std::abs(x.coords.norm() - 1.0) > 1e-12) {
            throw std::invalid_argument("Sphere: point not on the unit sphere");
        }
    }

    Point project(const Point& x) const {
        Point p{x.coords};
        p.coords.normalize();
        return p;
    }

    Tangent make_tangent(const Point& base, Eigen::VectorXd vec) const {
        check_dims(vec.size());
        // remove any normal component picked up by rounding
        vec -= vec.dot(base.coords) * base.coords;
        return Tangent{base, std::move(vec)};
    }

    Tangent zero_tangent(const Point& base) const {
        return Tangent{base, Eigen::VectorXd::Zero(n_ + 1)};
    }

    double inner(const Tangent& u, const Tangent& v) const { return u.vec.dot(v.vec); }
    double norm(const Tangent& v) const { return v.vec.norm(); }
    Tangent scale_tangent(const Tangent& v, double s) const { return Tangent{v.base, s * v.vec}; }

    double distance(const Point& x, const Point& y) const {
        // acos(<x,y>) alone loses ~sqrt(eps) of absolute accuracy near the
        // endpoints; pairing the cosine with the norm of the rejection keeps
        // the angle accurate to machine precision over the whole range.
        const double c = std::clamp(x.coords.dot(y.coords), -1.0, 1.0);
        const double s = (y.coords - c * x.coords).norm();
        return std::atan2(s, c);
    }

    Point exp_map(const Point& base, const Tangent& v) const {
        const double r = v.vec.norm();
        if (r == 0.0) return base;
        Point out{std::cos(r) * base.coords + (std::sin(r) / r) * v.vec};
        out.coords.normalize();
        return out;
    }

    Tangent log_map(const Point& base, const Point& target) const {
        const double c = std::clamp(base.coords.dot(target.coords), -1.0, 1.0);
        if (c <= -1.0 + 1e-9) {
            throw CutLocusError("Sphere::log_map: antipodal target");
        }
        const double theta = std::acos(c);
        Eigen::VectorXd w = target.coords - c * base.coords;
        const double wn = w.norm();
        if (wn < 1e-15 || theta == 0.0) return zero_tangent(base);
        return Tangent{base, (theta / wn) * w};
    }

    // Minimising geodesic point between x and z. Antipodal pairs take the
    // deterministic tie-break direction: the first coordinate axis projected
    // to the tangent space at x (the next axis if that projection vanishes).
    Point geodesic_interpolate(const Point& x, const Point& z, double t) const {
        if (t < 0.0 || t > 1.0) throw std::invalid_argument("geodesic_interpolate: t outside [0,1]");
        try {
            return exp_map(x, scale_tangent(log_map(x, z), t));
        } catch (const CutLocusError&) {
            return exp_map(x, scale_tangent(antipodal_tie_break(x), t));
        }
    }

    Point geodesic_symmetry(const Point& center, const Point& x) const {
        Point out{2.0 * center.coords.dot(x.coords) * center.coords - x.coords};
        out.coords.normalize();
        return out;
    }

    // Orthonormal basis of the tangent space, deterministic in the base point.
    std::vector<Tangent> tangent_basis(const Point& base) const {
        std::vector<Tangent> basis;
        basis.reserve(n_);
        std::vector<Eigen::VectorXd> accepted;
        for (int i = 0; i <= n_ && static_cast<int>(basis.size()) < n_; ++i) {
            Eigen::VectorXd v = Eigen::VectorXd::Unit(n_ + 1, i);
            v -= v.dot(base.coords) * base.coords;
            for (const auto& a : accepted) v -= v.dot(a) * a;
            const double nv = v.norm();
            if (nv > 1e-6) {
                v /= nv;
                accepted.push_back(v);
                basis.push_back(Tangent{base, v});
            }
        }
        return basis;
    }

    Point random_uniform_point(CounterRng& rng) const {
        Eigen::VectorXd g(n_ + 1);
        for (;;) {
            for (int i = 0; i <= n_; ++i) g[i] = normal(rng);
            const double gn = g.norm();
            if (gn > 1e-12) return Point{g / gn};
        }
    }

    Tangent random_unit_tangent(CounterRng& rng, const Point& base) const {
        for (;;) {
            Eigen::VectorXd g(n_ + 1);
            for (int i = 0; i <= n_; ++i) g[i] = normal(rng);
            g -= g.dot(base.coords) * base.coords;
            const double gn = g.norm();
            if (gn > 1e-12) return Tangent{base, g / gn};
        }
    }

  private:
    void check_dims(Eigen::Index sz) const {
        if (sz != n_ + 1) throw std::invalid_argument("Sphere: ambient dimension mismatch");
    }

    Tangent antipodal_tie_break(const Point& x) const {
        for (int i = 0; i <= n_; ++i) {
            Eigen::VectorXd u = Eigen::VectorXd::Unit(n_ + 1, i);
            u -= u.dot(x.coords) * x.coords;
            const double un = u.norm();
            if (un > 1e-8) return Tangent{x, (std::numbers::pi / un) * u};
        }
        throw std::logic_error("Sphere: tie-break direction not found");
    }

    int n_;
};

static_assert(Manifold<Sphere>);

}  // namespace baryopt
