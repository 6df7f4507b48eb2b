#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <dcgme/adam.hpp>
#include <dcgme/nn.hpp>
#include <dcgme/replay_buffer.hpp>
#include <dcgme/rng.hpp>
#include <dcgme/td3.hpp>

namespace dcgme {

    struct GaParams {
        double sigma1 = 0.005; // isotropic mutation scale
        double sigma2 = 0.05;  // line (directional) scale
    };

    struct PgParams {
        std::size_t gradient_steps = 30; // m; 150 at full scale
        std::size_t batch_size = 100;    // N
        double policy_lr = 5e-3;
    };

    // iso+line: x1 + sigma1 * N(0, I) + sigma2 * n * (x2 - x1), scalar n ~ N(0,1).
    // Draw order: n first, then one gaussian per coordinate.
    inline ParamVector variation_ga(std::span<const double> x1, std::span<const double> x2,
        const GaParams& params, Rng& rng)
    {
        if (x1.size() != x2.size())
            throw std::invalid_argument("variation_ga: parent length mismatch");
        const double line = params.sigma2 * rng.gaussian();
        ParamVector child(x1.size());
        for (std::size_t i = 0; i < child.size(); i++)
            child[i] = x1[i] + params.sigma1 * rng.gaussian() + line * (x2[i] - x1[i]);
        return child;
    }

    inline std::vector<ParamVector> variation_ga(
        std::span<const std::pair<const ParamVector*, const ParamVector*>> parents,
        const GaParams& params, Rng& rng)
    {
        std::vector<ParamVector> offspring;
        offspring.reserve(parents.size());
        for (const auto& [a, b] : parents)
            offspring.push_back(variation_ga(*a, *b, params, rng));
        return offspring;
    }

    // m deterministic-policy-gradient ascent steps per parent through critic 1,
    // fresh Adam state per parent. When the critic is descriptor-conditioned its
    // descriptor input is pinned to the parent's own descriptor for all steps.
    // Offspring that diverge to non-finite values are replaced by the unchanged
    // parent copy; *non_finite_resets counts such replacements.
    inline std::vector<ParamVector> variation_pg(const MlpArch& policy_arch,
        std::span<const ParamVector* const> parents,
        std::span<const std::vector<double>* const> parent_descriptors, const ActorCritic& ac,
        const ReplayBuffer& buffer, const PgParams& params, Rng& rng,
        std::size_t* non_finite_resets = nullptr)
    {
        if (ac.conditioned && parent_descriptors.size() != parents.size())
            throw std::invalid_argument("variation_pg: conditioned mode needs one descriptor per parent");
        if (buffer.size() == 0 && params.gradient_steps > 0 && !parents.empty())
            throw std::runtime_error("variation_pg: empty replay buffer");
        if (policy_arch.input_dim() != ac.state_dim || policy_arch.output_dim() != ac.action_dim)
            throw std::invalid_argument("variation_pg: policy arch does not match critic dims");

        std::vector<ParamVector> offspring;
        offspring.reserve(parents.size());

        MlpWorkspace policy_ws, critic_ws;
        std::vector<double> action(ac.action_dim);
        std::vector<double> q_in;
        std::vector<double> q_in_grad(ac.critic_arch.input_dim());
        std::vector<double> a_out_grad(ac.action_dim);
        std::vector<double> policy_in_grad(ac.state_dim);
        ParamVector grad(policy_arch.param_count());
        const double inv_n = 1.0 / static_cast<double>(params.batch_size);

        for (std::size_t p = 0; p < parents.size(); p++) {
            ParamVector child = *parents[p];
            AdamState opt = make_adam(params.policy_lr, child.size());
            std::span<const double> d_parent;
            if (ac.conditioned)
                d_parent = *parent_descriptors[p];
            for (std::size_t step = 0; step < params.gradient_steps; step++) {
                const std::vector<std::size_t> idx
                    = buffer.sample_indices(params.batch_size, rng);
                std::fill(grad.begin(), grad.end(), 0.0);
                for (std::size_t i : idx) {
                    const std::span<const double> s = buffer.state(i);
                    mlp_forward(policy_arch, child, s, action, policy_ws);
                    detail::build_input(q_in, s, action, d_parent);
                    double q_out[1];
                    mlp_forward(ac.critic_arch, ac.critic1, q_in, q_out, critic_ws);
                    const double og[1] = {1.0};
                    mlp_input_grad_cached(ac.critic_arch, ac.critic1, og, q_in_grad, critic_ws);
                    for (std::size_t j = 0; j < ac.action_dim; j++)
                        a_out_grad[j] = -q_in_grad[ac.state_dim + j] * inv_n;
                    mlp_backward_cached(policy_arch, child, a_out_grad, grad, policy_in_grad,
                        policy_ws);
                }
                adam_step(opt, child, grad);
            }
            bool finite = true;
            for (double v : child)
                if (!std::isfinite(v)) {
                    finite = false;
                    break;
                }
            if (!finite) {
                child = *parents[p];
                if (non_finite_resets)
                    (*non_finite_resets)++;
            }
            offspring.push_back(std::move(child));
        }
        return offspring;
    }

} // namespace dcgme
