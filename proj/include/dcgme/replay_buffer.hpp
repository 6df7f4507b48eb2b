#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <dcgme/rng.hpp>
#include <dcgme/transition.hpp>

namespace dcgme {

    // Bounded FIFO transition store with uniform sampling. Storage is
    // struct-of-arrays over a ring; logical index 0 is the oldest entry.
    class ReplayBuffer {
    public:
        ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim,
            std::size_t desc_dim)
            : _capacity(capacity), _state_dim(state_dim), _action_dim(action_dim),
              _desc_dim(desc_dim)
        {
            if (capacity == 0)
                throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
            _states.resize(capacity * state_dim);
            _actions.resize(capacity * action_dim);
            _rewards.resize(capacity);
            _next_states.resize(capacity * state_dim);
            _dones.resize(capacity);
            _descs.resize(capacity * desc_dim);
            _target_descs.resize(capacity * desc_dim);
        }

        std::size_t size() const { return _size; }
        std::size_t capacity() const { return _capacity; }
        std::size_t state_dim() const { return _state_dim; }
        std::size_t action_dim() const { return _action_dim; }
        std::size_t desc_dim() const { return _desc_dim; }

        void insert(const Transition& t)
        {
            if (t.state.size() != _state_dim || t.next_state.size() != _state_dim
                || t.action.size() != _action_dim || t.descriptor.size() != _desc_dim
                || t.target_descriptor.size() != _desc_dim)
                throw std::invalid_argument("ReplayBuffer::insert: transition shape mismatch");
            if (!(t.reward >= 0.0) || !std::isfinite(t.reward))
                throw std::invalid_argument("ReplayBuffer::insert: reward must be finite and >= 0");
            const std::size_t slot = _next;
            std::copy(t.state.begin(), t.state.end(), _states.begin() + slot * _state_dim);
            std::copy(t.action.begin(), t.action.end(), _actions.begin() + slot * _action_dim);
            _rewards[slot] = t.reward;
            std::copy(t.next_state.begin(), t.next_state.end(),
                _next_states.begin() + slot * _state_dim);
            _dones[slot] = t.done ? 1 : 0;
            std::copy(t.descriptor.begin(), t.descriptor.end(), _descs.begin() + slot * _desc_dim);
            std::copy(t.target_descriptor.begin(), t.target_descriptor.end(),
                _target_descs.begin() + slot * _desc_dim);
            _next = (_next + 1) % _capacity;
            if (_size < _capacity)
                _size++;
        }

        void insert(std::span<const Transition> transitions)
        {
            for (const Transition& t : transitions)
                insert(t);
        }

        // n uniform-with-replacement logical indices; one rng draw per index
        std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const
        {
            if (_size == 0)
                throw std::runtime_error("ReplayBuffer: cannot sample from an empty buffer");
            std::vector<std::size_t> idx(n);
            for (std::size_t i = 0; i < n; i++)
                idx[i] = static_cast<std::size_t>(rng.uniform_index(_size));
            return idx;
        }

        std::vector<Transition> sample(std::size_t n, Rng& rng) const
        {
            std::vector<Transition> out;
            out.reserve(n);
            for (std::size_t i : sample_indices(n, rng))
                out.push_back(transition_at(i));
            return out;
        }

        Transition transition_at(std::size_t logical) const
        {
            const std::size_t slot = physical(logical);
            Transition t;
            t.state.assign(state(logical).begin(), state(logical).end());
            t.action.assign(action(logical).begin(), action(logical).end());
            t.reward = _rewards[slot];
            t.next_state.assign(next_state(logical).begin(), next_state(logical).end());
            t.done = _dones[slot] != 0;
            t.descriptor.assign(descriptor(logical).begin(), descriptor(logical).end());
            t.target_descriptor.assign(target_descriptor(logical).begin(),
                target_descriptor(logical).end());
            return t;
        }

        std::span<const double> state(std::size_t i) const
        {
            return {_states.data() + physical(i) * _state_dim, _state_dim};
        }
        std::span<const double> action(std::size_t i) const
        {
            return {_actions.data() + physical(i) * _action_dim, _action_dim};
        }
        double reward(std::size_t i) const { return _rewards[physical(i)]; }
        std::span<const double> next_state(std::size_t i) const
        {
            return {_next_states.data() + physical(i) * _state_dim, _state_dim};
        }
        bool done(std::size_t i) const { return _dones[physical(i)] != 0; }
        std::span<const double> descriptor(std::size_t i) const
        {
            return {_descs.data() + physical(i) * _desc_dim, _desc_dim};
        }
        std::span<const double> target_descriptor(std::size_t i) const
        {
            return {_target_descs.data() + physical(i) * _desc_dim, _desc_dim};
        }

    private:
        std::size_t physical(std::size_t logical) const
        {
            if (logical >= _size)
                throw std::out_of_range("ReplayBuffer: index past size");
            if (_size < _capacity)
                return logical; // ring has not wrapped yet
            return (_next + logical) % _capacity;
        }

        std::size_t _capacity, _state_dim, _action_dim, _desc_dim;
        std::size_t _size = 0;
        std::size_t _next = 0;
        std::vector<double> _states, _actions, _rewards, _next_states, _descs, _target_descs;
        std::vector<std::uint8_t> _dones;
    };

} // namespace dcgme
