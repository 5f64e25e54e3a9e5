#pragma once

// Simulated-annealing comparator: temperature schedules and an MH chain with
// time-varying temperature that tracks the best visited point.

#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "baryopt/manifold.hpp"
#include "baryopt/objective.hpp"
#include "baryopt/sampler.hpp"

namespace baryopt {

template <class S>
concept TemperatureSchedule = requires(const S& s, long long n) {
    { s(n) } -> std::convertible_to<double>;
};

// T(n) = t0 * ratio^{floor(n / steps_per_level)}
struct GeometricSchedule {
    double t0 = 1.0;
    double ratio = 0.995;
    long long steps_per_level = 1;

    GeometricSchedule(double t0_in = 1.0, double ratio_in = 0.995, long long per_level = 1)
        : t0(t0_in), ratio(ratio_in), steps_per_level(per_level) {
        if (t0 <= 0.0) throw std::invalid_argument("GeometricSchedule: t0 must be positive");
        if (ratio <= 0.0 || ratio > 1.0) {
            throw std::invalid_argument("GeometricSchedule: ratio must lie in (0, 1]");
        }
        if (steps_per_level <= 0) {
            throw std::invalid_argument("GeometricSchedule: steps_per_level must be positive");
        }
    }

    double operator()(long long n) const {
        return t0 * std::pow(ratio, static_cast<double>(n / steps_per_level));
    }
};

// T(n) = c / log(n + offset)
struct LogarithmicSchedule {
    double c = 1.0;
    double offset = std::numbers::e;

    LogarithmicSchedule(double c_in = 1.0, double offset_in = std::numbers::e)
        : c(c_in), offset(offset_in) {
        if (c <= 0.0) throw std::invalid_argument("LogarithmicSchedule: c must be positive");
        if (offset <= 1.0) throw std::invalid_argument("LogarithmicSchedule: offset must exceed 1");
    }

    double operator()(long long n) const { return c / std::log(static_cast<double>(n) + offset); }
};

template <Manifold M>
struct AnnealingResult {
    typename M::Point final_point;
    double final_u = 0.0;
    typename M::Point best_point;
    double best_u = 0.0;
    long long accepted = 0;
    long long total_steps = 0;
    double acceptance_rate = 0.0;
};

// MH chain with per-step temperature from the schedule. Temperatures are
// validated on the fly: positive and nonincreasing. The consumer sees
// (step, T, point, U, accepted, best_u) for every step.
template <Manifold M, ProposalKernel<M> P, TemperatureSchedule S, class Consumer>
AnnealingResult<M> run_annealing(const M& m, const Objective<M>& obj, const P& proposal,
                                 const typename M::Point& x0, const S& schedule,
                                 long long n_steps, CounterRng& rng, Consumer&& consumer) {
    if (n_steps < 0) throw std::invalid_argument("run_annealing: n_steps must be >= 0");
    m.check_point(x0);
    AnnealingResult<M> result;
    result.final_point = x0;
    result.final_u = obj.eval(x0);
    result.best_point = x0;
    result.best_u = result.final_u;
    double prev_t = std::numeric_limits<double>::infinity();
    for (long long step = 0; step < n_steps; ++step) {
        const double t = schedule(step);
        if (t <= 0.0 || t > prev_t) {
            throw std::invalid_argument("run_annealing: schedule must stay positive and nonincreasing");
        }
        prev_t = t;
        const auto next = mh_step(m, obj, proposal, t, rng, result.final_point, result.final_u);
        result.final_point = next.point;
        result.final_u = next.u_value;
        result.accepted += next.accepted ? 1 : 0;
        if (next.u_value < result.best_u) {
            result.best_u = next.u_value;
            result.best_point = next.point;
        }
        if ((step + 1) % 1000 == 0) m.check_point(result.final_point);
        consumer(step, t, result.final_point, result.final_u, next.accepted, result.best_u);
    }
    result.total_steps = n_steps;
    result.acceptance_rate =
        n_steps > 0 ? static_cast<double>(result.accepted) / static_cast<double>(n_steps) : 0.0;
    return result;
}

template <Manifold M, ProposalKernel<M> P, TemperatureSchedule S>
AnnealingResult<M> run_annealing(const M& m, const Objective<M>& obj, const P& proposal,
                                 const typename M::Point& x0, const S& schedule,
                                 long long n_steps, CounterRng& rng) {
    return run_annealing(m, obj, proposal, x0, schedule, n_steps, rng,
                         [](long long, double, const typename M::Point&, double, bool, double) {});
}

}  // namespace baryopt
