#pragma once

// Symmetric Metropolis-Hastings sampler for the Gibbs distribution
// p_T(x) proportional to exp(-U(x)/T), with the two shipped symmetric
// proposal kernels: von Mises-Fisher steps on spheres and unitary
// conjugation steps on Grassmannians.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "baryopt/grassmann.hpp"
#include "baryopt/manifold.hpp"
#include "baryopt/objective.hpp"
#include "baryopt/random.hpp"
#include "baryopt/sphere.hpp"

namespace baryopt {

template <class P, class M>
concept ProposalKernel = Manifold<M> && requires(const P& p, const M& m, CounterRng& rng,
                                                 const typename M::Point& x) {
    { p.propose(m, rng, x) } -> std::same_as<typename M::Point>;
};

// z ~ vMF(current, kappa): symmetric because the density only depends on
// the inner product of the endpoints.
struct VmfProposal {
    double kappa = 20.0;

    Sphere::Point propose(const Sphere& m, CounterRng& rng, const Sphere::Point& x) const {
        if (kappa < 0.0) throw std::invalid_argument("VmfProposal: kappa must be >= 0");
        const double w = vmf_cosine(rng, kappa, m.ambient_dim());
        const auto dir = m.random_unit_tangent(rng, x);
        Eigen::VectorXd z = w * x.coords + std::sqrt(std::max(0.0, 1.0 - w * w)) * dir.vec;
        z.normalize();
        return Sphere::Point{z};
    }
};

// z = u x u^H with u = exp(i s H), H drawn from the GUE: symmetric because
// H and -H have the same law.
struct ConjugationProposal {
    double step_scale = 0.2;

    Grassmann::Point propose(const Grassmann& m, CounterRng& rng,
                             const Grassmann::Point& x) const {
        if (step_scale <= 0.0) throw std::invalid_argument("ConjugationProposal: step_scale must be > 0");
        const Eigen::MatrixXcd u = m.unitary_from_hermitian(m.random_gue(rng), step_scale);
        return m.project(Grassmann::Point{u * x.coords * u.adjoint()});
    }
};

template <Manifold M>
struct MhStep {
    typename M::Point point;
    double u_value = 0.0;
    bool accepted = false;
};

// One Metropolis-Hastings step: propose z, accept with probability
// min{1, exp[(U(prev) - U(z))/T]} (the complement is the rejection
// probability r_n). The uniform draw happens on every step so the random
// stream advances identically whatever the outcome.
template <Manifold M, ProposalKernel<M> P>
MhStep<M> mh_step(const M& m, const Objective<M>& obj, const P& proposal, double temperature,
                  CounterRng& rng, const typename M::Point& current, double current_u) {
    if (temperature <= 0.0) throw std::invalid_argument("mh_step: temperature must be positive");
    const auto z = proposal.propose(m, rng, current);
    const double u_new = obj.eval(z);
    const double alpha = std::exp((current_u - u_new) / temperature);
    const double coin = uniform_open(rng);
    if (coin < alpha) return {z, u_new, true};
    return {current, current_u, false};
}

struct ChainOptions {
    double temperature = 1.0;
    long long n_steps = 0;
    long long burn_in = 0;
    long long check_interval = 1000;  // manifold invariant re-check period
};

template <Manifold M>
struct ChainResult {
    typename M::Point final_point;
    double final_u = 0.0;
    long long accepted = 0;
    long long total_steps = 0;
    double acceptance_rate = 0.0;
};

// Runs the chain from x0 and feeds every post-burn-in state (including
// repeats after rejection) to the consumer as (step, point, U, accepted).
// Fully deterministic given the rng state.
template <Manifold M, ProposalKernel<M> P, class Consumer>
ChainResult<M> run_chain(const M& m, const Objective<M>& obj, const P& proposal,
                         const typename M::Point& x0, const ChainOptions& opt, CounterRng& rng,
                         Consumer&& consumer) {
    if (opt.n_steps < 0 || opt.burn_in < 0 || opt.burn_in > opt.n_steps) {
        throw std::invalid_argument("run_chain: need 0 <= burn_in <= n_steps");
    }
    if (opt.check_interval <= 0) throw std::invalid_argument("run_chain: check_interval must be > 0");
    m.check_point(x0);
    ChainResult<M> result;
    result.final_point = x0;
    result.final_u = obj.eval(x0);
    for (long long step = 0; step < opt.n_steps; ++step) {
        const auto next =
            mh_step(m, obj, proposal, opt.temperature, rng, result.final_point, result.final_u);
        result.final_point = next.point;
        result.final_u = next.u_value;
        result.accepted += next.accepted ? 1 : 0;
        if ((step + 1) % opt.check_interval == 0) m.check_point(result.final_point);
        if (step >= opt.burn_in) consumer(step, result.final_point, result.final_u, next.accepted);
    }
    result.total_steps = opt.n_steps;
    result.acceptance_rate =
        opt.n_steps > 0 ? static_cast<double>(result.accepted) / static_cast<double>(opt.n_steps)
                        : 0.0;
    return result;
}

template <Manifold M, ProposalKernel<M> P>
ChainResult<M> run_chain(const M& m, const Objective<M>& obj, const P& proposal,
                         const typename M::Point& x0, const ChainOptions& opt, CounterRng& rng) {
    return run_chain(m, obj, proposal, x0, opt, rng,
                     [](long long, const typename M::Point&, double, bool) {});
}

}  // namespace baryopt
