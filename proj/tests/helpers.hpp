#pragma once

#include <cstddef>
#include <vector>

#include <dcgme/nn.hpp>
#include <dcgme/td3.hpp>

namespace dcgme::testing {

    // Embeds parameters of a standard net into a conditioned net whose input
    // appends desc_dim coordinates: first-layer descriptor columns are zeroed,
    // everything else copies over. With all descriptor inputs at zero the two
    // nets compute identical functions and receive identical gradients on the
    // shared parameters.
    inline ParamVector embed_with_zero_desc_columns(const MlpArch& std_arch,
        const MlpArch& cond_arch, const ParamVector& std_params, std::size_t desc_dim)
    {
        ParamVector out(cond_arch.param_count(), 0.0);
        const std::size_t n_in_std = std_arch.layer_sizes[0];
        const std::size_t n_in_cond = cond_arch.layer_sizes[0];
        const std::size_t n_out0 = std_arch.layer_sizes[1];
        for (std::size_t i = 0; i < n_out0; i++)
            for (std::size_t j = 0; j < n_in_std; j++)
                out[i * n_in_cond + j] = std_params[i * n_in_std + j];
        // first-layer biases and all later layers line up after the offset shift
        const std::size_t std_off = n_in_std * n_out0;
        const std::size_t cond_off = n_in_cond * n_out0;
        for (std::size_t k = std_off; k < std_params.size(); k++)
            out[cond_off + (k - std_off)] = std_params[k];
        (void)desc_dim;
        return out;
    }

    // Inverse view: pull the shared (non-descriptor) parameters back out of a
    // conditioned net for bit-exact comparison against a standard net.
    inline ParamVector extract_shared_params(const MlpArch& std_arch, const MlpArch& cond_arch,
        const ParamVector& cond_params)
    {
        ParamVector out(std_arch.param_count(), 0.0);
        const std::size_t n_in_std = std_arch.layer_sizes[0];
        const std::size_t n_in_cond = cond_arch.layer_sizes[0];
        const std::size_t n_out0 = std_arch.layer_sizes[1];
        for (std::size_t i = 0; i < n_out0; i++)
            for (std::size_t j = 0; j < n_in_std; j++)
                out[i * n_in_std + j] = cond_params[i * n_in_cond + j];
        const std::size_t std_off = n_in_std * n_out0;
        const std::size_t cond_off = n_in_cond * n_out0;
        for (std::size_t k = std_off; k < out.size(); k++)
            out[k] = cond_params[cond_off + (k - std_off)];
        return out;
    }

    // Pairs a standard ActorCritic with a conditioned twin that shares every
    // non-descriptor parameter (descriptor columns zeroed).
    inline ActorCritic make_conditioned_twin(const ActorCritic& std_ac, const Td3Config& cfg)
    {
        ActorCritic cond = make_actor_critic(std_ac.state_dim, std_ac.action_dim,
            std_ac.desc_dim, std::vector<std::size_t>(std_ac.actor_arch.layer_sizes.begin() + 1,
                                std_ac.actor_arch.layer_sizes.end() - 1),
            std::vector<std::size_t>(std_ac.critic_arch.layer_sizes.begin() + 1,
                std_ac.critic_arch.layer_sizes.end() - 1),
            std_ac.action_bound(), true, cfg, 0);
        cond.actor = embed_with_zero_desc_columns(std_ac.actor_arch, cond.actor_arch,
            std_ac.actor, std_ac.desc_dim);
        cond.critic1 = embed_with_zero_desc_columns(std_ac.critic_arch, cond.critic_arch,
            std_ac.critic1, std_ac.desc_dim);
        cond.critic2 = embed_with_zero_desc_columns(std_ac.critic_arch, cond.critic_arch,
            std_ac.critic2, std_ac.desc_dim);
        cond.actor_target = embed_with_zero_desc_columns(std_ac.actor_arch, cond.actor_arch,
            std_ac.actor_target, std_ac.desc_dim);
        cond.critic1_target = embed_with_zero_desc_columns(std_ac.critic_arch, cond.critic_arch,
            std_ac.critic1_target, std_ac.desc_dim);
        cond.critic2_target = embed_with_zero_desc_columns(std_ac.critic_arch, cond.critic_arch,
            std_ac.critic2_target, std_ac.desc_dim);
        return cond;
    }

} // namespace dcgme::testing
