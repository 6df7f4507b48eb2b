#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <dcgme/adam.hpp>
#include <dcgme/nn.hpp>
#include <dcgme/replay_buffer.hpp>
#include <dcgme/rng.hpp>

namespace dcgme {

    // S(d, d') = exp(-||d - d'|| / l), in (0, 1], equal to 1 iff d = d'.
    inline double similarity(std::span<const double> d, std::span<const double> d_prime,
        double lengthscale)
    {
        if (d.size() != d_prime.size())
            throw std::invalid_argument("similarity: dimension mismatch");
        if (!(lengthscale > 0.0))
            throw std::invalid_argument("similarity: lengthscale must be > 0");
        double acc = 0.0;
        for (std::size_t i = 0; i < d.size(); i++)
            acc += (d[i] - d_prime[i]) * (d[i] - d_prime[i]);
        return std::exp(-std::sqrt(acc) / lengthscale);
    }

    struct Td3Config {
        double gamma = 0.99;
        std::size_t actor_delay = 2; // Delta
        double target_update_rate = 0.005; // tau
        double smoothing_noise_sigma = 0.2;
        double smoothing_noise_clip = 0.5;
        std::size_t batch_size = 100; // N
        std::size_t critic_training_steps = 300; // n; 3000 at full scale
        double lengthscale = 0.008; // l
        double actor_lr = 3e-4;
        double critic_lr = 3e-4;

        void validate() const
        {
            if (!(gamma > 0.0 && gamma <= 1.0))
                throw std::invalid_argument("td3: gamma must be in (0, 1]");
            if (!(target_update_rate > 0.0 && target_update_rate <= 1.0))
                throw std::invalid_argument("td3: target_update_rate must be in (0, 1]");
            if (!(lengthscale > 0.0))
                throw std::invalid_argument("td3: lengthscale must be > 0");
            if (smoothing_noise_clip < 0.0)
                throw std::invalid_argument("td3: smoothing_noise_clip must be >= 0");
            if (batch_size == 0 || actor_delay == 0)
                throw std::invalid_argument("td3: batch_size and actor_delay must be >= 1");
        }
    };

    // Actor plus twin critics with target copies. Conditioned variants append
    // the descriptor to the network inputs: actor(s ++ d), critic(s ++ a ++ d).
    struct ActorCritic {
        bool conditioned = false;
        bool actor_desc_frozen = false; // actor ignores its descriptor input
        std::size_t state_dim = 0, action_dim = 0, desc_dim = 0;
        MlpArch actor_arch, critic_arch;
        ParamVector actor, critic1, critic2;
        ParamVector actor_target, critic1_target, critic2_target;
        AdamState actor_opt, critic1_opt, critic2_opt;

        double action_bound() const { return actor_arch.output_bound; }
    };

    inline ActorCritic make_actor_critic(std::size_t state_dim, std::size_t action_dim,
        std::size_t desc_dim, std::vector<std::size_t> actor_hidden,
        std::vector<std::size_t> critic_hidden, double action_bound, bool conditioned,
        const Td3Config& cfg, std::uint64_t seed)
    {
        ActorCritic ac;
        ac.conditioned = conditioned;
        ac.state_dim = state_dim;
        ac.action_dim = action_dim;
        ac.desc_dim = desc_dim;

        std::vector<std::size_t> a_sizes;
        a_sizes.push_back(state_dim + (conditioned ? desc_dim : 0));
        a_sizes.insert(a_sizes.end(), actor_hidden.begin(), actor_hidden.end());
        a_sizes.push_back(action_dim);
        ac.actor_arch = mlp_arch(std::move(a_sizes), OutputActivation::tanh_scaled, action_bound);

        std::vector<std::size_t> c_sizes;
        c_sizes.push_back(state_dim + action_dim + (conditioned ? desc_dim : 0));
        c_sizes.insert(c_sizes.end(), critic_hidden.begin(), critic_hidden.end());
        c_sizes.push_back(1);
        ac.critic_arch = mlp_arch(std::move(c_sizes), OutputActivation::identity);

        ac.actor = mlp_init(ac.actor_arch, seed);
        ac.critic1 = mlp_init(ac.critic_arch, seed + 1);
        ac.critic2 = mlp_init(ac.critic_arch, seed + 2);
        ac.actor_target = ac.actor;
        ac.critic1_target = ac.critic1;
        ac.critic2_target = ac.critic2;
        ac.actor_opt = make_adam(cfg.actor_lr, ac.actor.size());
        ac.critic1_opt = make_adam(cfg.critic_lr, ac.critic1.size());
        ac.critic2_opt = make_adam(cfg.critic_lr, ac.critic2.size());
        return ac;
    }

    // First-layer actor weights fed by the descriptor input.
    inline std::vector<std::size_t> actor_desc_weight_indices(const ActorCritic& ac)
    {
        std::vector<std::size_t> idx;
        if (!ac.conditioned)
            return idx;
        const std::size_t n_in = ac.actor_arch.layer_sizes[0];
        const std::size_t n_out = ac.actor_arch.layer_sizes[1];
        for (std::size_t i = 0; i < n_out; i++)
            for (std::size_t j = ac.state_dim; j < n_in; j++)
                idx.push_back(i * n_in + j);
        return idx;
    }

    // Ablation switch: hold the actor's descriptor input weights at zero so the
    // actor's output is invariant to the descriptor it is given.
    inline void freeze_actor_descriptor_input(ActorCritic& ac)
    {
        ac.actor_desc_frozen = true;
        for (std::size_t i : actor_desc_weight_indices(ac)) {
            ac.actor[i] = 0.0;
            ac.actor_target[i] = 0.0;
        }
    }

    // Gathered minibatch (row-major, one row per transition).
    struct TransitionBatch {
        std::size_t n = 0, state_dim = 0, action_dim = 0, desc_dim = 0;
        std::vector<double> states, actions, rewards, next_states, descs, target_descs;
        std::vector<std::uint8_t> dones;

        void gather(const ReplayBuffer& buffer, std::span<const std::size_t> idx)
        {
            n = idx.size();
            state_dim = buffer.state_dim();
            action_dim = buffer.action_dim();
            desc_dim = buffer.desc_dim();
            states.resize(n * state_dim);
            actions.resize(n * action_dim);
            rewards.resize(n);
            next_states.resize(n * state_dim);
            descs.resize(n * desc_dim);
            target_descs.resize(n * desc_dim);
            dones.resize(n);
            for (std::size_t i = 0; i < n; i++) {
                const std::size_t k = idx[i];
                auto s = buffer.state(k);
                std::copy(s.begin(), s.end(), states.begin() + i * state_dim);
                auto a = buffer.action(k);
                std::copy(a.begin(), a.end(), actions.begin() + i * action_dim);
                rewards[i] = buffer.reward(k);
                auto ns = buffer.next_state(k);
                std::copy(ns.begin(), ns.end(), next_states.begin() + i * state_dim);
                auto d = buffer.descriptor(k);
                std::copy(d.begin(), d.end(), descs.begin() + i * desc_dim);
                auto td = buffer.target_descriptor(k);
                std::copy(td.begin(), td.end(), target_descs.begin() + i * desc_dim);
                dones[i] = buffer.done(k) ? 1 : 0;
            }
        }

        std::span<const double> state(std::size_t i) const
        {
            return {states.data() + i * state_dim, state_dim};
        }
        std::span<const double> action(std::size_t i) const
        {
            return {actions.data() + i * action_dim, action_dim};
        }
        std::span<const double> next_state(std::size_t i) const
        {
            return {next_states.data() + i * state_dim, state_dim};
        }
        std::span<const double> desc(std::size_t i) const
        {
            return {descs.data() + i * desc_dim, desc_dim};
        }
        std::span<const double> target_desc(std::size_t i) const
        {
            return {target_descs.data() + i * desc_dim, desc_dim};
        }
    };

    namespace detail {

        // scratch shared by the trainer and the PG variation operator
        struct Td3Workspace {
            MlpWorkspace actor_ws, critic_ws;
            std::vector<double> in, q_in, next_action, out1, input_grad;
            ParamVector grad1, grad2, actor_grad;
        };

        inline void build_input(std::vector<double>& dst, std::span<const double> a,
            std::span<const double> b, std::span<const double> c = {})
        {
            dst.clear();
            dst.insert(dst.end(), a.begin(), a.end());
            dst.insert(dst.end(), b.begin(), b.end());
            dst.insert(dst.end(), c.begin(), c.end());
        }

    } // namespace detail

    // Regression target per transition. Smoothing noise is drawn per action
    // dimension for every row, so the rng stream advances identically in
    // conditioned and standard modes (and past done flags).
    inline std::vector<double> critic_target(const ActorCritic& ac, const TransitionBatch& batch,
        const Td3Config& cfg, Rng& rng, detail::Td3Workspace& ws)
    {
        const double bound = ac.action_bound();
        const double clip = cfg.smoothing_noise_clip;
        std::vector<double> targets(batch.n);
        ws.next_action.resize(ac.action_dim);
        ws.out1.resize(1);
        for (std::size_t i = 0; i < batch.n; i++) {
            if (ac.conditioned)
                detail::build_input(ws.in, batch.next_state(i), batch.target_desc(i));
            else
                detail::build_input(ws.in, batch.next_state(i), {});
            mlp_forward(ac.actor_arch, ac.actor_target, ws.in, ws.next_action, ws.actor_ws);
            for (std::size_t j = 0; j < ac.action_dim; j++) {
                const double eps
                    = std::clamp(rng.gaussian() * cfg.smoothing_noise_sigma, -clip, clip);
                ws.next_action[j] = std::clamp(ws.next_action[j] + eps, -bound, bound);
            }
            if (ac.conditioned)
                detail::build_input(ws.q_in, batch.next_state(i), ws.next_action,
                    batch.target_desc(i));
            else
                detail::build_input(ws.q_in, batch.next_state(i), ws.next_action);
            mlp_forward(ac.critic_arch, ac.critic1_target, ws.q_in, ws.out1, ws.critic_ws);
            const double q1 = ws.out1[0];
            mlp_forward(ac.critic_arch, ac.critic2_target, ws.q_in, ws.out1, ws.critic_ws);
            const double q2 = ws.out1[0];
            const double scale = ac.conditioned
                ? similarity(batch.desc(i), batch.target_desc(i), cfg.lengthscale)
                : 1.0;
            double y = scale * batch.rewards[i];
            if (!batch.dones[i])
                y += cfg.gamma * std::min(q1, q2);
            targets[i] = y;
        }
        return targets;
    }

    inline std::vector<double> critic_target(const ActorCritic& ac, const TransitionBatch& batch,
        const Td3Config& cfg, Rng& rng)
    {
        detail::Td3Workspace ws;
        return critic_target(ac, batch, cfg, rng, ws);
    }

    // One Adam step on the mean-squared regression loss, per critic.
    inline void critic_update(ActorCritic& ac, const TransitionBatch& batch,
        std::span<const double> targets, detail::Td3Workspace& ws)
    {
        if (targets.size() != batch.n)
            throw std::invalid_argument("critic_update: targets length mismatch");
        ws.out1.resize(1);
        ws.input_grad.resize(ac.critic_arch.input_dim());
        const double inv_n = 1.0 / static_cast<double>(batch.n);
        ParamVector* critics[2] = {&ac.critic1, &ac.critic2};
        AdamState* opts[2] = {&ac.critic1_opt, &ac.critic2_opt};
        ParamVector* grads[2] = {&ws.grad1, &ws.grad2};
        for (int c = 0; c < 2; c++) {
            grads[c]->assign(ac.critic1.size(), 0.0);
            for (std::size_t i = 0; i < batch.n; i++) {
                if (ac.conditioned)
                    detail::build_input(ws.q_in, batch.state(i), batch.action(i),
                        batch.target_desc(i));
                else
                    detail::build_input(ws.q_in, batch.state(i), batch.action(i));
                mlp_forward(ac.critic_arch, *critics[c], ws.q_in, ws.out1, ws.critic_ws);
                const double delta = 2.0 * (ws.out1[0] - targets[i]) * inv_n;
                const double og[1] = {delta};
                mlp_backward_cached(ac.critic_arch, *critics[c], og, *grads[c], ws.input_grad,
                    ws.critic_ws);
            }
            adam_step(*opts[c], *critics[c], *grads[c]);
        }
    }

    inline void critic_update(ActorCritic& ac, const TransitionBatch& batch,
        std::span<const double> targets)
    {
        detail::Td3Workspace ws;
        critic_update(ac, batch, targets, ws);
    }

    // Gradient of -mean_i Q1(s_i, pi(s_i | d'_i) | d'_i) w.r.t. the actor
    // parameters (chained d_a Q through d_phi pi). Conditioned mode feeds each
    // transition's target descriptor to both nets.
    inline void actor_policy_gradient(const ActorCritic& ac, const TransitionBatch& batch,
        ParamVector& grad, detail::Td3Workspace& ws)
    {
        if (batch.n == 0)
            throw std::invalid_argument("actor_policy_gradient: empty batch");
        grad.assign(ac.actor.size(), 0.0);
        ws.out1.resize(1);
        ws.next_action.resize(ac.action_dim);
        ws.input_grad.resize(ac.critic_arch.input_dim());
        std::vector<double> actor_in_grad(ac.actor_arch.input_dim());
        std::vector<double> a_out_grad(ac.action_dim);
        const double inv_n = 1.0 / static_cast<double>(batch.n);
        for (std::size_t i = 0; i < batch.n; i++) {
            if (ac.conditioned)
                detail::build_input(ws.in, batch.state(i), batch.target_desc(i));
            else
                detail::build_input(ws.in, batch.state(i), {});
            mlp_forward(ac.actor_arch, ac.actor, ws.in, ws.next_action, ws.actor_ws);
            if (ac.conditioned)
                detail::build_input(ws.q_in, batch.state(i), ws.next_action,
                    batch.target_desc(i));
            else
                detail::build_input(ws.q_in, batch.state(i), ws.next_action);
            mlp_forward(ac.critic_arch, ac.critic1, ws.q_in, ws.out1, ws.critic_ws);
            const double og[1] = {1.0};
            mlp_input_grad_cached(ac.critic_arch, ac.critic1, og, ws.input_grad, ws.critic_ws);
            for (std::size_t j = 0; j < ac.action_dim; j++)
                a_out_grad[j] = -ws.input_grad[ac.state_dim + j] * inv_n;
            mlp_backward_cached(ac.actor_arch, ac.actor, a_out_grad, grad, actor_in_grad,
                ws.actor_ws);
        }
    }

    // One Adam ascent step on the actor through critic 1.
    inline void actor_dpg_update(ActorCritic& ac, const TransitionBatch& batch,
        detail::Td3Workspace& ws)
    {
        actor_policy_gradient(ac, batch, ws.actor_grad, ws);
        if (ac.actor_desc_frozen)
            for (std::size_t i : actor_desc_weight_indices(ac))
                ws.actor_grad[i] = 0.0;
        adam_step(ac.actor_opt, ac.actor, ws.actor_grad);
    }

    inline void actor_dpg_update(ActorCritic& ac, const TransitionBatch& batch)
    {
        detail::Td3Workspace ws;
        actor_dpg_update(ac, batch, ws);
    }

    // target <- tau * main + (1 - tau) * target
    inline void soft_update(ActorCritic& ac, double tau)
    {
        if (!(tau > 0.0 && tau <= 1.0))
            throw std::invalid_argument("soft_update: tau must be in (0, 1]");
        auto lerp = [tau](ParamVector& target, const ParamVector& main) {
            for (std::size_t i = 0; i < target.size(); i++)
                target[i] = tau * main[i] + (1.0 - tau) * target[i];
        };
        lerp(ac.actor_target, ac.actor);
        lerp(ac.critic1_target, ac.critic1);
        lerp(ac.critic2_target, ac.critic2);
    }

    // n iterations of sample / target / critic regression, with the actor and
    // target networks updated every actor_delay-th iteration.
    inline void train_actor_critic(ActorCritic& ac, const ReplayBuffer& buffer,
        const Td3Config& cfg, Rng& rng)
    {
        cfg.validate();
        if (cfg.critic_training_steps == 0)
            return;
        if (buffer.size() == 0)
            throw std::runtime_error("train_actor_critic: empty replay buffer");
        detail::Td3Workspace ws;
        TransitionBatch batch;
        for (std::size_t t = 1; t <= cfg.critic_training_steps; t++) {
            const std::vector<std::size_t> idx = buffer.sample_indices(cfg.batch_size, rng);
            batch.gather(buffer, idx);
            const std::vector<double> targets = critic_target(ac, batch, cfg, rng, ws);
            critic_update(ac, batch, targets, ws);
            if (t % cfg.actor_delay == 0) {
                actor_dpg_update(ac, batch, ws);
                soft_update(ac, cfg.target_update_rate);
            }
        }
    }

} // namespace dcgme
