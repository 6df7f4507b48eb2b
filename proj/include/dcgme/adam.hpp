#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <dcgme/nn.hpp>

namespace dcgme {

    struct AdamState {
        std::vector<double> first_moment;
        std::vector<double> second_moment;
        std::uint64_t step_count = 0;
        double learning_rate = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
    };

    inline AdamState make_adam(double learning_rate, std::size_t param_count)
    {
        AdamState st;
        st.learning_rate = learning_rate;
        st.first_moment.assign(param_count, 0.0);
        st.second_moment.assign(param_count, 0.0);
        return st;
    }

    // Standard bias-corrected Adam update, in place.
    inline void adam_step(AdamState& st, ParamVector& params, const ParamVector& grad)
    {
        if (params.size() != grad.size() || params.size() != st.first_moment.size())
            throw std::invalid_argument("adam_step: shape mismatch");
        st.step_count++;
        const double b1 = st.beta1, b2 = st.beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step_count));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step_count));
        const double lr = st.learning_rate;
        for (std::size_t i = 0; i < params.size(); i++) {
            const double g = grad[i];
            st.first_moment[i] = b1 * st.first_moment[i] + (1.0 - b1) * g;
            st.second_moment[i] = b2 * st.second_moment[i] + (1.0 - b2) * g * g;
            const double m_hat = st.first_moment[i] / c1;
            const double v_hat = st.second_moment[i] / c2;
            params[i] -= lr * m_hat / (std::sqrt(v_hat) + st.epsilon);
        }
    }

} // namespace dcgme
