#pragma once

// Counter-based seedable RNG plus the scalar samplers the chains need.
// The engine keys a 64-bit mix function on (seed, stream, counter), so
// independent streams are cheap and replay is exact regardless of how
// runs are scheduled across threads. Distributions are hand-rolled on
// top of it because std::*_distribution is implementation-defined and
// reruns must be byte-identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace baryopt {

namespace detail {
// SplitMix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}  // namespace detail

// Counter-based engine: output_i = mix(key + i*golden). Satisfies
// UniformRandomBitGenerator.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(detail::mix64(detail::mix64(seed + detail::kGolden) + detail::kGolden * (stream + 1))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        counter_ += detail::kGolden;
        return detail::mix64(key_ + counter_);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Uniform double in [0, 1).
inline double uniform_double(CounterRng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1); safe to pass to log().
inline double uniform_open(CounterRng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller; one value per call, no cached state.
inline double normal(CounterRng& rng) {
    const double u1 = uniform_open(rng);
    const double u2 = uniform_double(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 boosted through
// Gamma(shape + 1) * U^{1/shape}.
inline double gamma_sample(CounterRng& rng, double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma_sample: shape <= 0");
    if (shape < 1.0) {
        const double u = uniform_open(rng);
        return gamma_sample(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = uniform_open(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double beta_sample(CounterRng& rng, double a, double b) {
    const double x = gamma_sample(rng, a);
    const double y = gamma_sample(rng, b);
    return x / (x + y);
}

// Cosine of the angle between a von Mises-Fisher draw and its mean direction,
// on the sphere S^{p-1} in R^p. p = 3 uses the exact inverse CDF; otherwise
// Wood's rejection scheme. kappa ~ 0 falls back to the uniform marginal.
inline double vmf_cosine(CounterRng& rng, double kappa, int p) {
    if (p < 3) throw std::invalid_argument("vmf_cosine: ambient dimension < 3");
    if (kappa < 0.0) throw std::invalid_argument("vmf_cosine: kappa < 0");
    const double d = p - 1.0;  // sphere dimension
    if (kappa < 1e-8) {
        // uniform on the sphere: t has density proportional to (1-t^2)^{(p-3)/2}
        if (p == 3) return 2.0 * uniform_double(rng) - 1.0;
        return 2.0 * beta_sample(rng, 0.5 * d, 0.5 * d) - 1.0;
    }
    if (p == 3) {
        const double u = uniform_open(rng);
        const double e2k = std::exp(-2.0 * kappa);
        double t = 1.0 + std::log(u + (1.0 - u) * e2k) / kappa;
        return std::clamp(t, -1.0, 1.0);
    }
    // Envelope sampler for the cosine density e^{kappa t} (1-t^2)^{(p-3)/2}:
    // a Beta((p-1)/2, (p-1)/2) draw pushed through a Moebius map whose
    // parameter b places the mode of the acceptance ratio at x0.
    const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + d * d)) / d;
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + d * std::log(1.0 - x0 * x0);
    for (;;) {
        const double z = beta_sample(rng, 0.5 * d, 0.5 * d);
        const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        const double u = uniform_open(rng);
        if (kappa * w + d * std::log(1.0 - x0 * w) - c >= std::log(u)) {
            return std::clamp(w, -1.0, 1.0);
        }
    }
}

}  // namespace baryopt
