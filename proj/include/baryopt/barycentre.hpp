#pragma once

// Barycentre tracking and Monte-Carlo functional estimators: the streaming
// geodesic update, the batch Frechet mean, and estimators for E_T, its
// gradient and Hessian form, and the Wasserstein distance to a Dirac mass.
// All standard errors use leave-one-block-out jackknife over 50 blocks.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "baryopt/manifold.hpp"
#include "baryopt/sphere.hpp"

namespace baryopt {

struct FunctionalEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long long n_samples = 0;
    long long n_dropped = 0;
    bool drop_warning = false;  // more than 0.1% of samples dropped
};

namespace detail {

constexpr int kJackknifeBlocks = 50;

// leave-one-block-out jackknife mean and standard error
inline FunctionalEstimate mean_with_jackknife(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean_with_jackknife: no samples");
    const std::size_t n = values.size();
    const std::size_t blocks = std::min<std::size_t>(kJackknifeBlocks, n);
    std::vector<double> block_sum(blocks, 0.0);
    std::vector<std::size_t> block_count(blocks, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = i * blocks / n;
        block_sum[b] += values[i];
        block_count[b] += 1;
        total += values[i];
    }
    FunctionalEstimate est;
    est.n_samples = static_cast<long long>(n);
    est.value = total / static_cast<double>(n);
    if (blocks < 2) return est;
    std::vector<double> loo(blocks);
    double loo_mean = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        loo[b] = (total - block_sum[b]) / static_cast<double>(n - block_count[b]);
        loo_mean += loo[b];
    }
    loo_mean /= static_cast<double>(blocks);
    double ss = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) ss += (loo[b] - loo_mean) * (loo[b] - loo_mean);
    est.std_error = std::sqrt((static_cast<double>(blocks) - 1.0) / static_cast<double>(blocks) * ss);
    return est;
}

}  // namespace detail

// Streaming barycentre: x_n = x_{n-1} walked 1/n of the way to the n-th
// sample along the connecting geodesic.
template <Manifold M>
class BarycentreTracker {
  public:
    explicit BarycentreTracker(const M& m) : m_(m) {}

    void update(const typename M::Point& z) {
        ++count_;
        if (count_ == 1) {
            x_ = z;
        } else {
            x_ = m_.geodesic_interpolate(x_, z, 1.0 / static_cast<double>(count_));
        }
    }

    const typename M::Point& current() const {
        if (count_ == 0) throw std::logic_error("BarycentreTracker: no samples yet");
        return x_;
    }

    long long count() const { return count_; }

  private:
    M m_;
    typename M::Point x_{};
    long long count_ = 0;
};

struct FrechetOptions {
    double step = 1.0;
    double tolerance = 1e-10;
    int max_iterations = 500;
};

template <Manifold M>
struct FrechetResult {
    typename M::Point point;
    int iterations = 0;
    bool converged = false;
    long long dropped_last_iteration = 0;
};

// Batch Frechet mean by Riemannian gradient descent on the mean squared
// distance; samples at the iterate's cut locus are dropped for that step.
template <Manifold M>
FrechetResult<M> batch_frechet_mean(const M& m, const std::vector<typename M::Point>& samples,
                                    const FrechetOptions& opt = {}) {
    if (samples.empty()) throw std::invalid_argument("batch_frechet_mean: no samples");
    FrechetResult<M> result;
    result.point = samples.front();
    for (int it = 0; it < opt.max_iterations; ++it) {
        result.iterations = it + 1;
        auto grad = m.zero_tangent(result.point);
        long long used = 0;
        result.dropped_last_iteration = 0;
        for (const auto& z : samples) {
            try {
                grad.vec += m.log_map(result.point, z).vec;
                ++used;
            } catch (const CutLocusError&) {
                ++result.dropped_last_iteration;
            }
        }
        if (used == 0) throw std::runtime_error("batch_frechet_mean: every sample at cut locus");
        grad.vec /= static_cast<double>(used);
        if (m.norm(grad) < opt.tolerance) {
            result.converged = true;
            return result;
        }
        result.point = m.exp_map(result.point, m.scale_tangent(grad, opt.step));
    }
    return result;
}

// E_T functional at x: one half the mean squared distance to the samples.
template <Manifold M>
FunctionalEstimate estimate_E_T(const M& m, const std::vector<typename M::Point>& samples,
                                const typename M::Point& x) {
    if (samples.empty()) throw std::invalid_argument("estimate_E_T: no samples");
    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& z : samples) {
        const double d = m.distance(x, z);
        values.push_back(0.5 * d * d);
    }
    return detail::mean_with_jackknife(values);
}

template <Manifold M>
struct GradientEstimate {
    typename M::Tangent mean;
    double norm = 0.0;
    double std_error = 0.0;                   // jackknife error of the norm
    std::vector<double> component_std_error;  // per real coordinate of the mean
    long long n_samples = 0;
    long long n_dropped = 0;
    bool drop_warning = false;
};

namespace detail {

// real coordinates of a tangent coefficient array (complex entries split
// into real and imaginary parts)
template <class Vec>
std::vector<double> flatten_real(const Vec& v) {
    std::vector<double> out;
    if constexpr (std::is_same_v<typename Vec::Scalar, std::complex<double>>) {
        out.reserve(static_cast<std::size_t>(2 * v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            out.push_back(v(i).real());
            out.push_back(v(i).imag());
        }
    } else {
        out.reserve(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    }
    return out;
}

}  // namespace detail

// grad E_T(x) = -mean of log_x(z); samples at the cut locus of x are dropped.
template <Manifold M>
GradientEstimate<M> estimate_gradient(const M& m, const std::vector<typename M::Point>& samples,
                                      const typename M::Point& x) {
    if (samples.empty()) throw std::invalid_argument("estimate_gradient: no samples");
    GradientEstimate<M> est{m.zero_tangent(x)};
    const std::size_t blocks =
        std::min<std::size_t>(detail::kJackknifeBlocks, samples.size());
    std::vector<typename M::Tangent> block_sum;
    std::vector<long long> block_count(blocks, 0);
    block_sum.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) block_sum.push_back(m.zero_tangent(x));
    long long used = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t b = i * blocks / samples.size();
        try {
            const auto l = m.log_map(x, samples[i]);
            block_sum[b].vec += l.vec;
            block_count[b] += 1;
            ++used;
        } catch (const CutLocusError&) {
            ++est.n_dropped;
        }
    }
    if (used == 0) throw std::runtime_error("estimate_gradient: every sample at cut locus");
    est.n_samples = used;
    est.drop_warning =
        static_cast<double>(est.n_dropped) > 0.001 * static_cast<double>(samples.size());
    auto total = m.zero_tangent(x);
    for (const auto& s : block_sum) total.vec += s.vec;
    est.mean = total;
    est.mean.vec *= -1.0 / static_cast<double>(used);
    est.norm = m.norm(est.mean);
    if (blocks >= 2) {
        std::vector<double> loo(blocks, 0.0);
        std::vector<std::vector<double>> loo_coords(blocks);
        double loo_mean = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            auto rest = total;
            rest.vec -= block_sum[b].vec;
            rest.vec /= static_cast<double>(used - block_count[b]);
            loo[b] = m.norm(rest);
            loo_coords[b] = detail::flatten_real(rest.vec);
            loo_mean += loo[b];
        }
        loo_mean /= static_cast<double>(blocks);
        double ss = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) ss += (loo[b] - loo_mean) * (loo[b] - loo_mean);
        const double scale = (static_cast<double>(blocks) - 1.0) / static_cast<double>(blocks);
        est.std_error = std::sqrt(scale * ss);
        const std::size_t n_coords = loo_coords.front().size();
        est.component_std_error.assign(n_coords, 0.0);
        for (std::size_t c = 0; c < n_coords; ++c) {
            double mean_c = 0.0;
            for (std::size_t b = 0; b < blocks; ++b) mean_c += loo_coords[b][c];
            mean_c /= static_cast<double>(blocks);
            double ss_c = 0.0;
            for (std::size_t b = 0; b < blocks; ++b) {
                ss_c += (loo_coords[b][c] - mean_c) * (loo_coords[b][c] - mean_c);
            }
            est.component_std_error[c] = std::sqrt(scale * ss_c);
        }
    }
    return est;
}

// Closed-form Hessian quadratic form on spheres:
// H_x(z)(u,u) = <u,e_r>^2 + r cot(r) (|u|^2 - <u,e_r>^2), r = d(x,z).
inline FunctionalEstimate estimate_hessian_form(const Sphere& m,
                                                const std::vector<Sphere::Point>& samples,
                                                const Sphere::Point& x,
                                                const Sphere::Tangent& u) {
    if (samples.empty()) throw std::invalid_argument("estimate_hessian_form: no samples");
    const double uu = m.inner(u, u);
    std::vector<double> values;
    values.reserve(samples.size());
    long long dropped = 0;
    for (const auto& z : samples) {
        const double r = m.distance(x, z);
        if (r < 1e-12) {
            values.push_back(uu);  // identity form at coincidence
            continue;
        }
        try {
            const auto l = m.log_map(x, z);
            const double t = m.inner(u, Sphere::Tangent{x, l.vec / r});
            values.push_back(t * t + r * std::cos(r) / std::sin(r) * (uu - t * t));
        } catch (const CutLocusError&) {
            ++dropped;
        }
    }
    if (values.empty()) throw std::runtime_error("estimate_hessian_form: every sample at cut locus");
    auto est = detail::mean_with_jackknife(values);
    est.n_dropped = dropped;
    est.drop_warning = static_cast<double>(dropped) > 0.001 * static_cast<double>(samples.size());
    return est;
}

// Finite-difference Hessian form using common samples at all three points:
// (E_T(exp(x,hu)) - 2 E_T(x) + E_T(exp(x,-hu))) / h^2 sample by sample.
template <Manifold M>
FunctionalEstimate hessian_form_fd(const M& m, const std::vector<typename M::Point>& samples,
                                   const typename M::Point& x, const typename M::Tangent& u,
                                   double h) {
    if (samples.empty()) throw std::invalid_argument("hessian_form_fd: no samples");
    if (h <= 0.0) throw std::invalid_argument("hessian_form_fd: step must be positive");
    const auto xp = m.exp_map(x, m.scale_tangent(u, h));
    const auto xm = m.exp_map(x, m.scale_tangent(u, -h));
    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& z : samples) {
        const double dp = m.distance(xp, z);
        const double d0 = m.distance(x, z);
        const double dm = m.distance(xm, z);
        values.push_back((dp * dp - 2.0 * d0 * d0 + dm * dm) / (2.0 * h * h));
    }
    return detail::mean_with_jackknife(values);
}

// W(P_T, delta_{x*}) estimated as the mean distance to x*.
template <Manifold M>
FunctionalEstimate wasserstein_to_dirac(const M& m,
                                        const std::vector<typename M::Point>& samples,
                                        const typename M::Point& x_star) {
    if (samples.empty()) throw std::invalid_argument("wasserstein_to_dirac: no samples");
    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& z : samples) values.push_back(m.distance(x_star, z));
    return detail::mean_with_jackknife(values);
}

}  // namespace baryopt
