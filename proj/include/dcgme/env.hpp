#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <dcgme/transition.hpp>

namespace dcgme {

    // Deterministic desk-scale tasks. All share the same positive reward
    //   r = 1 + c_e * (1 - |a|^2 / (bound^2 * action_dim))  in [1, 1 + c_e],
    // so fitness is bounded below by the episode length and diversity is the
    // only pressure that moves descriptors away from the energy optimum.
    enum class EnvName { point_omni, point_trap_omni, duty_cycle_uni };

    inline std::string env_name_str(EnvName n)
    {
        switch (n) {
        case EnvName::point_omni: return "point_omni";
        case EnvName::point_trap_omni: return "point_trap_omni";
        case EnvName::duty_cycle_uni: return "duty_cycle_uni";
        }
        return "?";
    }

    struct Wall {
        double x1, y1, x2, y2;
    };

    struct EnvSpec {
        EnvName name = EnvName::point_omni;
        std::size_t state_dim = 2;
        std::size_t action_dim = 2;
        std::size_t episode_length = 100;
        std::size_t descriptor_dim = 2;
        double action_bound = 1.0;
        double dt = 0.01;          // velocity-command scale for the point tasks
        double energy_coeff = 0.5; // c_e
        std::vector<Wall> walls;   // point_trap_omni only
    };

    inline EnvSpec make_env(EnvName name)
    {
        EnvSpec spec;
        spec.name = name;
        switch (name) {
        case EnvName::point_omni:
            break;
        case EnvName::point_trap_omni:
            // a cup around the arena center, opening toward the start position
            spec.walls = {
                {0.55, 0.35, 0.75, 0.35},
                {0.75, 0.35, 0.75, 0.65},
                {0.55, 0.65, 0.75, 0.65},
            };
            break;
        case EnvName::duty_cycle_uni:
            spec.state_dim = 3;
            spec.episode_length = 200;
            break;
        }
        return spec;
    }

    struct EnvState {
        std::vector<double> observation;
        std::size_t step_index = 0;
        // point tasks: [0]=x, [1]=y; duty task: [0]=position, [1]/[2]=duty counts
        std::array<double, 3> acc{};
    };

    inline EnvState env_reset(const EnvSpec& spec)
    {
        EnvState st;
        if (spec.name == EnvName::duty_cycle_uni) {
            st.acc = {0.0, 0.0, 0.0};
            st.observation = {0.0, 0.0, 0.0};
        } else {
            st.acc = {0.5, 0.5, 0.0};
            st.observation = {0.5, 0.5};
        }
        return st;
    }

    namespace detail {

        // parameter t in [0,1] where motion p->q first meets the wall, +inf if it doesn't
        inline double wall_hit_param(const Wall& w, double px, double py, double qx, double qy)
        {
            const double rx = qx - px, ry = qy - py;
            const double sx = w.x2 - w.x1, sy = w.y2 - w.y1;
            const double denom = rx * sy - ry * sx;
            if (denom == 0.0)
                return std::numeric_limits<double>::infinity();
            const double t = ((w.x1 - px) * sy - (w.y1 - py) * sx) / denom;
            const double u = ((w.x1 - px) * ry - (w.y1 - py) * rx) / denom;
            if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0)
                return t;
            return std::numeric_limits<double>::infinity();
        }

    } // namespace detail

    // Advances the state. `action` is clipped into [-bound, bound] in place and
    // the returned reward uses the clipped action. Throws past the horizon.
    inline double env_step_inplace(const EnvSpec& spec, EnvState& st, std::span<double> action)
    {
        if (action.size() != spec.action_dim)
            throw std::invalid_argument("env_step: action dimension mismatch");
        if (st.step_index >= spec.episode_length)
            throw std::logic_error("env_step: episode already finished");

        const double bound = spec.action_bound;
        double energy = 0.0;
        for (double& a : action) {
            a = std::clamp(a, -bound, bound);
            energy += a * a;
        }
        const double reward = 1.0
            + spec.energy_coeff
                * (1.0 - energy / (bound * bound * static_cast<double>(spec.action_dim)));

        if (spec.name == EnvName::duty_cycle_uni) {
            st.acc[0] += std::max(0.0, action[0] + action[1]) / 2.0;
            if (action[0] > 0.0)
                st.acc[1] += 1.0;
            if (action[1] > 0.0)
                st.acc[2] += 1.0;
            const double t = static_cast<double>(spec.episode_length);
            st.observation = {st.acc[0] / t, st.acc[1] / t, st.acc[2] / t};
        } else {
            const double px = st.acc[0], py = st.acc[1];
            double qx = std::clamp(px + spec.dt * action[0], 0.0, 1.0);
            double qy = std::clamp(py + spec.dt * action[1], 0.0, 1.0);
            if (!spec.walls.empty()) {
                double t_hit = std::numeric_limits<double>::infinity();
                for (const Wall& w : spec.walls)
                    t_hit = std::min(t_hit, detail::wall_hit_param(w, px, py, qx, qy));
                if (t_hit <= 1.0) {
                    // stop just short of the wall
                    const double t = std::max(0.0, t_hit - 1e-6);
                    qx = px + t * (qx - px);
                    qy = py + t * (qy - py);
                }
            }
            st.acc[0] = qx;
            st.acc[1] = qy;
            st.observation = {qx, qy};
        }
        st.step_index++;
        return reward;
    }

    inline std::pair<EnvState, double> env_step(const EnvSpec& spec, const EnvState& st,
        std::vector<double> action)
    {
        EnvState next = st;
        const double reward = env_step_inplace(spec, next, action);
        return {std::move(next), reward};
    }

    inline std::vector<double> extract_descriptor(const EnvSpec& spec, const EnvState& final_state)
    {
        if (final_state.step_index != spec.episode_length)
            throw std::logic_error("extract_descriptor: episode not complete");
        if (spec.name == EnvName::duty_cycle_uni) {
            const double t = static_cast<double>(spec.episode_length);
            return {final_state.acc[1] / t, final_state.acc[2] / t};
        }
        return {final_state.acc[0], final_state.acc[1]};
    }

    struct EvalResult {
        double fitness = 0.0;
        std::vector<double> descriptor;
        std::vector<Transition> transitions;
    };

    // Runs one full episode. Fitness is the undiscounted return; transitions
    // carry done=false throughout (fixed-horizon truncation, not termination)
    // and empty descriptor fields for the caller to fill.
    template <typename Policy>
    EvalResult rollout(const EnvSpec& spec, Policy&& policy)
    {
        EnvState st = env_reset(spec);
        EvalResult res;
        res.transitions.reserve(spec.episode_length);
        std::vector<double> action(spec.action_dim);
        for (std::size_t t = 0; t < spec.episode_length; t++) {
            Transition tr;
            tr.state = st.observation;
            policy(std::span<const double>(tr.state), std::span<double>(action));
            const double reward = env_step_inplace(spec, st, action);
            tr.action.assign(action.begin(), action.end());
            tr.reward = reward;
            tr.next_state = st.observation;
            tr.done = false;
            res.fitness += reward;
            res.transitions.push_back(std::move(tr));
        }
        res.descriptor = extract_descriptor(spec, st);
        return res;
    }

} // namespace dcgme
