#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <dcgme/archive.hpp>
#include <dcgme/env.hpp>
#include <dcgme/nn.hpp>
#include <dcgme/replay_buffer.hpp>
#include <dcgme/rng.hpp>
#include <dcgme/td3.hpp>
#include <dcgme/variation.hpp>

namespace dcgme {

    enum class Algorithm { map_elites, pga_me, dcg_me };
    enum class Ablation { none, no_actor_eval, synthetic_negatives, unconditioned_actor };

    inline std::string algorithm_str(Algorithm a)
    {
        switch (a) {
        case Algorithm::map_elites: return "map_elites";
        case Algorithm::pga_me: return "pga_me";
        case Algorithm::dcg_me: return "dcg_me";
        }
        return "?";
    }

    inline std::string ablation_str(Ablation a)
    {
        switch (a) {
        case Ablation::none: return "none";
        case Ablation::no_actor_eval: return "no_actor_eval";
        case Ablation::synthetic_negatives: return "synthetic_negatives";
        case Ablation::unconditioned_actor: return "unconditioned_actor";
        }
        return "?";
    }

    struct RunConfig {
        Algorithm algorithm = Algorithm::dcg_me;
        EnvSpec env = make_env(EnvName::point_omni);
        std::size_t eval_budget = 51200; // I
        std::size_t batch_size = 256;    // b
        std::size_t ga_count = 128;      // g <= b
        double descriptor_noise_sigma = 0.0004; // sigma_d
        Td3Config td3;
        GaParams ga;
        PgParams pg;
        std::uint64_t seed = 0;
        Ablation ablation = Ablation::none;

        std::vector<std::size_t> policy_hidden{128, 128};
        std::vector<std::size_t> actor_hidden{256, 256};
        std::vector<std::size_t> critic_hidden{256, 256};
        std::size_t buffer_capacity = 1000000;
        std::size_t centroid_count = 1024;
        std::uint64_t centroid_seed = 42;
        bool count_actor_evals_in_budget = false;

        void validate() const
        {
            if (batch_size < 1)
                throw std::invalid_argument("run config: batch_size (b) must be >= 1");
            if (ga_count > batch_size)
                throw std::invalid_argument("run config: the constraint g <= b is violated: ga_count ("
                    + std::to_string(ga_count) + ") exceeds batch_size ("
                    + std::to_string(batch_size) + ")");
            if (eval_budget < batch_size)
                throw std::invalid_argument("run config: eval_budget (I) must be >= batch_size (b)");
            if (descriptor_noise_sigma < 0.0)
                throw std::invalid_argument("run config: descriptor_noise_sigma must be >= 0");
            if (ablation != Ablation::none && algorithm != Algorithm::dcg_me)
                throw std::invalid_argument("run config: ablations only apply to dcg_me");
            if (algorithm == Algorithm::pga_me && actor_hidden != policy_hidden)
                throw std::invalid_argument(
                    "run config: pga_me inserts the actor into the archive, so actor_hidden "
                    "must equal policy_hidden");
            if (centroid_count < 1)
                throw std::invalid_argument("run config: centroid_count must be >= 1");
            if (buffer_capacity < 1)
                throw std::invalid_argument("run config: buffer_capacity must be >= 1");
            if (ga_count < 1 && algorithm == Algorithm::map_elites)
                throw std::invalid_argument("run config: map_elites needs ga variations");
            td3.validate();
            if (env.episode_length < 1 || env.action_bound <= 0.0)
                throw std::invalid_argument("run config: invalid environment spec");
        }
    };

    struct IterationLog {
        std::size_t evaluations_so_far = 0;
        double qd_score = 0.0;
        double coverage = 0.0;
        double max_fitness = 0.0;
        double wall_time_s = 0.0;
    };

    struct RunResult {
        Archive archive;
        MlpArch policy_arch;
        ActorCritic actor_critic; // default-constructed shell for map_elites
        std::vector<IterationLog> logs;
        std::optional<ReplayBuffer> buffer;
        std::size_t pg_non_finite_resets = 0;
    };

    // b target descriptors: uniformly selected elites plus per-coordinate
    // gaussian noise, clamped into [0,1]^dim.
    inline std::vector<std::vector<double>> sample_target_descriptors(const Archive& archive,
        std::size_t b, double sigma_d, Rng& rng)
    {
        const std::vector<std::size_t> occ = archive.occupied_cells();
        if (occ.empty())
            throw std::runtime_error("sample_target_descriptors: archive is empty");
        std::vector<std::vector<double>> targets(b);
        for (std::size_t k = 0; k < b; k++) {
            const Elite& e = *archive.cells[occ[rng.uniform_index(occ.size())]];
            std::vector<double> d(e.descriptor.size());
            for (std::size_t j = 0; j < d.size(); j++)
                d[j] = std::clamp(e.descriptor[j] + sigma_d * rng.gaussian(), 0.0, 1.0);
            targets[k] = std::move(d);
        }
        return targets;
    }

    // Episode under the conditioned actor asked to achieve `target`.
    inline EvalResult rollout_actor(const ActorCritic& ac, const EnvSpec& env,
        std::span<const double> target)
    {
        if (!ac.conditioned)
            throw std::invalid_argument("rollout_actor: actor is not descriptor-conditioned");
        MlpWorkspace ws;
        std::vector<double> actor_in(ac.actor_arch.input_dim());
        return rollout(env, [&](std::span<const double> s, std::span<double> a) {
            std::copy(s.begin(), s.end(), actor_in.begin());
            std::copy(target.begin(), target.end(), actor_in.begin() + s.size());
            mlp_forward(ac.actor_arch, ac.actor, actor_in, a, ws);
        });
    }

    // Rolls out the conditioned actor once per target; stores transitions with
    // observed descriptor d and target d'. Never touches the archive.
    inline void evaluate_actor_batch(const ActorCritic& ac, const EnvSpec& env,
        std::span<const std::vector<double>> targets, ReplayBuffer& buffer)
    {
        if (!ac.conditioned)
            throw std::invalid_argument("evaluate_actor_batch: actor is not descriptor-conditioned");
        for (const std::vector<double>& target : targets) {
            EvalResult res = rollout_actor(ac, env, target);
            for (Transition& tr : res.transitions) {
                tr.descriptor = res.descriptor;
                tr.target_descriptor = target;
                buffer.insert(tr);
            }
        }
    }

    namespace detail {

        template <typename Net>
        EvalResult rollout_policy(const EnvSpec& env, const MlpArch& arch, const Net& params,
            MlpWorkspace& ws)
        {
            return rollout(env, [&](std::span<const double> s, std::span<double> a) {
                mlp_forward(arch, params, s, a, ws);
            });
        }

    } // namespace detail

    using IterationCallback
        = std::function<void(std::size_t iteration, const Archive&, const ActorCritic&)>;

    // One full optimization run. Deterministic given the config; the callback
    // (when set) fires after every iteration, e.g. for checkpointing.
    inline RunResult run(const RunConfig& cfg, const IterationCallback& on_iteration = {})
    {
        cfg.validate();
        const auto t0 = std::chrono::steady_clock::now();
        const EnvSpec& env = cfg.env;
        const bool uses_trainer = cfg.algorithm != Algorithm::map_elites;
        const bool conditioned = cfg.algorithm == Algorithm::dcg_me;

        std::vector<std::size_t> policy_sizes;
        policy_sizes.push_back(env.state_dim);
        policy_sizes.insert(policy_sizes.end(), cfg.policy_hidden.begin(),
            cfg.policy_hidden.end());
        policy_sizes.push_back(env.action_dim);
        const MlpArch policy_arch
            = mlp_arch(std::move(policy_sizes), OutputActivation::tanh_scaled, env.action_bound);

        RunResult result;
        result.policy_arch = policy_arch;
        result.archive
            = Archive(cvt_centroids_cached(cfg.centroid_count, env.descriptor_dim,
                cfg.centroid_seed));
        Archive& archive = result.archive;

        Rng rng(cfg.seed);
        ReplayBuffer buffer(uses_trainer ? cfg.buffer_capacity : 1, env.state_dim,
            env.action_dim, env.descriptor_dim);

        if (uses_trainer) {
            result.actor_critic = make_actor_critic(env.state_dim, env.action_dim,
                env.descriptor_dim, cfg.actor_hidden, cfg.critic_hidden, env.action_bound,
                conditioned, cfg.td3, cfg.seed ^ 0x9E3779B97F4A7C15ull);
            if (cfg.ablation == Ablation::unconditioned_actor)
                freeze_actor_descriptor_input(result.actor_critic);
        }
        ActorCritic& ac = result.actor_critic;

        MlpWorkspace rollout_ws;

        // archive seeded with b random solutions; these evaluations fill the
        // archive but count against neither the budget nor the replay buffer
        for (std::size_t i = 0; i < cfg.batch_size; i++) {
            ParamVector genotype = mlp_init(policy_arch, rng.uniform_index(UINT64_MAX));
            EvalResult res = detail::rollout_policy(env, policy_arch, genotype, rollout_ws);
            try_insert(archive, std::move(genotype), res.fitness, res.descriptor);
        }

        const std::size_t b = cfg.batch_size;
        std::size_t evaluations = 0;
        std::size_t iteration = 0;

        auto evaluate_and_add = [&](ParamVector genotype) {
            EvalResult res = detail::rollout_policy(env, policy_arch, genotype, rollout_ws);
            if (uses_trainer) {
                for (Transition& tr : res.transitions) {
                    tr.descriptor = res.descriptor;
                    tr.target_descriptor = res.descriptor; // positive sample: d' = d
                    buffer.insert(tr);
                }
                if (cfg.ablation == Ablation::synthetic_negatives) {
                    // artificial negative samples: same episode re-targeted at a
                    // uniformly drawn descriptor
                    std::vector<double> fake(env.descriptor_dim);
                    for (double& v : fake)
                        v = rng.uniform();
                    for (Transition tr : res.transitions) {
                        tr.target_descriptor = fake;
                        buffer.insert(tr);
                    }
                }
            }
            try_insert(archive, std::move(genotype), res.fitness, res.descriptor);
        };

        while (evaluations < cfg.eval_budget) {
            iteration++;

            // 1. actor-critic training (skipped while the buffer is empty)
            if (uses_trainer && buffer.size() > 0)
                train_actor_critic(ac, buffer, cfg.td3, rng);

            // 2. selection
            const std::size_t n_parents
                = cfg.algorithm == Algorithm::pga_me ? b - 1 : b;
            const std::size_t n_ga = cfg.algorithm == Algorithm::map_elites
                ? n_parents
                : std::min(cfg.ga_count, n_parents);
            const std::vector<const Elite*> parents = select_uniform(archive, n_parents, rng);
            const std::vector<const Elite*> ga_partners = select_uniform(archive, n_ga, rng);

            // 3. variation
            std::vector<ParamVector> offspring;
            offspring.reserve(n_parents);
            for (std::size_t i = 0; i < n_ga; i++)
                offspring.push_back(variation_ga(parents[i]->genotype,
                    ga_partners[i]->genotype, cfg.ga, rng));
            if (n_parents > n_ga) {
                std::vector<const ParamVector*> pg_parents;
                std::vector<const std::vector<double>*> pg_descs;
                for (std::size_t i = n_ga; i < n_parents; i++) {
                    pg_parents.push_back(&parents[i]->genotype);
                    pg_descs.push_back(&parents[i]->descriptor);
                }
                if (buffer.size() == 0) {
                    // first iteration: nothing to learn from yet
                    for (const ParamVector* p : pg_parents)
                        offspring.push_back(*p);
                } else {
                    std::vector<ParamVector> pg_offspring = variation_pg(policy_arch,
                        pg_parents, pg_descs, ac, buffer, cfg.pg, rng,
                        &result.pg_non_finite_resets);
                    for (ParamVector& o : pg_offspring)
                        offspring.push_back(std::move(o));
                }
            }

            // 4. actor evaluation: negative samples for the conditioned critic
            if (cfg.algorithm == Algorithm::dcg_me && cfg.ablation != Ablation::no_actor_eval
                && cfg.ablation != Ablation::synthetic_negatives) {
                const auto targets
                    = sample_target_descriptors(archive, b, cfg.descriptor_noise_sigma, rng);
                evaluate_actor_batch(ac, env, targets, buffer);
                if (cfg.count_actor_evals_in_budget)
                    evaluations += b;
            }

            // 5. offspring evaluation and addition
            for (ParamVector& genotype : offspring)
                evaluate_and_add(std::move(genotype));

            // 6. pga_me: the greedy actor competes for one archive slot
            if (cfg.algorithm == Algorithm::pga_me)
                evaluate_and_add(ac.actor);

            evaluations += b;

            const ArchiveMetrics m = archive_metrics(archive);
            IterationLog log;
            log.evaluations_so_far = evaluations;
            log.qd_score = m.qd_score;
            log.coverage = m.coverage;
            log.max_fitness = m.max_fitness.value_or(0.0);
            log.wall_time_s
                = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            result.logs.push_back(log);

            if (on_iteration)
                on_iteration(iteration, archive, ac);
        }
        if (uses_trainer)
            result.buffer = std::move(buffer);
        return result;
    }

} // namespace dcgme
