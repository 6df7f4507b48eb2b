#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <dcgme/rng.hpp>

namespace dcgme {

    // Flat parameter storage for one network; layout is layer-major,
    // weights-then-bias per layer, row-major weights (row = output unit).
    using ParamVector = std::vector<double>;

    enum class HiddenActivation { relu };
    enum class OutputActivation { identity, tanh_scaled };

    struct MlpArch {
        std::vector<std::size_t> layer_sizes; // input, hidden..., output
        HiddenActivation hidden = HiddenActivation::relu;
        OutputActivation output = OutputActivation::identity;
        double output_bound = 1.0; // tanh_scaled range is [-output_bound, +output_bound]

        std::size_t input_dim() const { return layer_sizes.front(); }
        std::size_t output_dim() const { return layer_sizes.back(); }
        std::size_t layer_count() const { return layer_sizes.size() - 1; }

        std::size_t param_count() const
        {
            std::size_t n = 0;
            for (std::size_t l = 0; l + 1 < layer_sizes.size(); l++)
                n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
            return n;
        }

        void validate() const
        {
            if (layer_sizes.size() < 2)
                throw std::invalid_argument("MlpArch: need at least 2 layers");
            for (std::size_t s : layer_sizes)
                if (s < 1)
                    throw std::invalid_argument("MlpArch: all layer sizes must be >= 1");
            if (output == OutputActivation::tanh_scaled && !(output_bound > 0.0))
                throw std::invalid_argument("MlpArch: tanh_scaled bound must be > 0");
        }

        bool operator==(const MlpArch&) const = default;
    };

    inline MlpArch mlp_arch(std::vector<std::size_t> sizes, OutputActivation out, double bound = 1.0)
    {
        MlpArch arch;
        arch.layer_sizes = std::move(sizes);
        arch.output = out;
        arch.output_bound = bound;
        arch.validate();
        return arch;
    }

    // Scratch buffers reused across forward/backward calls.
    struct MlpWorkspace {
        std::vector<std::vector<double>> acts; // per-layer activations, acts[0] = input
        std::vector<double> delta;
        std::vector<double> delta_prev;
    };

    // Fan-in uniform weights in [-1/sqrt(n_in), +1/sqrt(n_in)], zero biases.
    inline ParamVector mlp_init(const MlpArch& arch, std::uint64_t seed)
    {
        arch.validate();
        Rng rng(seed);
        ParamVector params(arch.param_count());
        std::size_t off = 0;
        for (std::size_t l = 0; l < arch.layer_count(); l++) {
            const std::size_t n_in = arch.layer_sizes[l];
            const std::size_t n_out = arch.layer_sizes[l + 1];
            const double range = 1.0 / std::sqrt(static_cast<double>(n_in));
            for (std::size_t i = 0; i < n_out * n_in; i++)
                params[off + i] = rng.uniform(-range, range);
            off += n_out * n_in;
            // biases already zero
            off += n_out;
        }
        return params;
    }

    inline void mlp_forward(const MlpArch& arch, std::span<const double> params,
        std::span<const double> input, std::span<double> output, MlpWorkspace& ws)
    {
        const std::size_t layers = arch.layer_count();
        if (input.size() != arch.input_dim() || output.size() != arch.output_dim())
            throw std::invalid_argument("mlp_forward: dimension mismatch");
        if (params.size() != arch.param_count())
            throw std::invalid_argument("mlp_forward: parameter count mismatch");

        ws.acts.resize(layers + 1);
        ws.acts[0].assign(input.begin(), input.end());

        std::size_t off = 0;
        for (std::size_t l = 0; l < layers; l++) {
            const std::size_t n_in = arch.layer_sizes[l];
            const std::size_t n_out = arch.layer_sizes[l + 1];
            const double* w = params.data() + off;
            const double* b = w + n_in * n_out;
            const std::vector<double>& in = ws.acts[l];
            std::vector<double>& out = ws.acts[l + 1];
            out.resize(n_out);
            const bool last = (l + 1 == layers);
            for (std::size_t i = 0; i < n_out; i++) {
                const double* wrow = w + i * n_in;
                // four fixed partial sums, lane = index mod 4: keeps the
                // floating-point reduction order independent of trailing
                // zero-weighted inputs (and of auto-vectorization width)
                double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
                const std::size_t tail = n_in & ~static_cast<std::size_t>(3);
                std::size_t j = 0;
                for (; j < tail; j += 4) {
                    p0 += wrow[j] * in[j];
                    p1 += wrow[j + 1] * in[j + 1];
                    p2 += wrow[j + 2] * in[j + 2];
                    p3 += wrow[j + 3] * in[j + 3];
                }
                for (; j < n_in; j++) {
                    switch (j & 3) {
                    case 0: p0 += wrow[j] * in[j]; break;
                    case 1: p1 += wrow[j] * in[j]; break;
                    case 2: p2 += wrow[j] * in[j]; break;
                    default: p3 += wrow[j] * in[j]; break;
                    }
                }
                double s = b[i] + ((p0 + p1) + (p2 + p3));
                if (!last)
                    out[i] = s > 0.0 ? s : 0.0;
                else if (arch.output == OutputActivation::tanh_scaled)
                    out[i] = arch.output_bound * std::tanh(s);
                else
                    out[i] = s;
            }
            off += (n_in + 1) * n_out;
        }
        const std::vector<double>& final_act = ws.acts[layers];
        for (std::size_t i = 0; i < output.size(); i++)
            output[i] = final_act[i];
    }

    inline std::vector<double> mlp_forward(const MlpArch& arch, const ParamVector& params,
        const std::vector<double>& input)
    {
        MlpWorkspace ws;
        std::vector<double> out(arch.output_dim());
        mlp_forward(arch, params, input, out, ws);
        return out;
    }

    // Backward pass over activations already present in ws (from a forward with
    // the same arch/params/input). Accumulates into param_grad, overwrites
    // input_grad.
    inline void mlp_backward_cached(const MlpArch& arch, std::span<const double> params,
        std::span<const double> output_grad, std::span<double> param_grad,
        std::span<double> input_grad, MlpWorkspace& ws)
    {
        const std::size_t layers = arch.layer_count();
        if (output_grad.size() != arch.output_dim())
            throw std::invalid_argument("mlp_backward: output_grad dimension mismatch");
        if (param_grad.size() != arch.param_count() || input_grad.size() != arch.input_dim())
            throw std::invalid_argument("mlp_backward: gradient buffer mismatch");

        // output-layer delta
        ws.delta.assign(output_grad.begin(), output_grad.end());
        if (arch.output == OutputActivation::tanh_scaled) {
            const double bound = arch.output_bound;
            for (std::size_t i = 0; i < ws.delta.size(); i++) {
                const double y = ws.acts[layers][i];
                ws.delta[i] *= bound - y * y / bound; // d/dz of bound*tanh(z)
            }
        }

        // offset of the last layer's weights
        std::vector<std::size_t> offsets(layers);
        {
            std::size_t off = 0;
            for (std::size_t l = 0; l < layers; l++) {
                offsets[l] = off;
                off += (arch.layer_sizes[l] + 1) * arch.layer_sizes[l + 1];
            }
        }

        for (std::size_t li = layers; li-- > 0;) {
            const std::size_t n_in = arch.layer_sizes[li];
            const std::size_t n_out = arch.layer_sizes[li + 1];
            const double* w = params.data() + offsets[li];
            double* gw = param_grad.data() + offsets[li];
            double* gb = gw + n_in * n_out;
            const std::vector<double>& in = ws.acts[li];

            for (std::size_t i = 0; i < n_out; i++) {
                const double d = ws.delta[i];
                double* gwrow = gw + i * n_in;
                for (std::size_t j = 0; j < n_in; j++)
                    gwrow[j] += d * in[j];
                gb[i] += d;
            }

            ws.delta_prev.assign(n_in, 0.0);
            for (std::size_t i = 0; i < n_out; i++) {
                const double d = ws.delta[i];
                const double* wrow = w + i * n_in;
                for (std::size_t j = 0; j < n_in; j++)
                    ws.delta_prev[j] += wrow[j] * d;
            }
            if (li > 0) {
                // relu mask: post-activation is positive iff pre-activation is
                for (std::size_t j = 0; j < n_in; j++)
                    if (!(in[j] > 0.0))
                        ws.delta_prev[j] = 0.0;
            }
            std::swap(ws.delta, ws.delta_prev);
        }

        for (std::size_t j = 0; j < input_grad.size(); j++)
            input_grad[j] = ws.delta[j];
    }

    // Input gradient only, over cached activations; skips the parameter
    // gradient entirely (the policy-gradient chain needs just d<out,g>/d_input).
    inline void mlp_input_grad_cached(const MlpArch& arch, std::span<const double> params,
        std::span<const double> output_grad, std::span<double> input_grad, MlpWorkspace& ws)
    {
        const std::size_t layers = arch.layer_count();
        ws.delta.assign(output_grad.begin(), output_grad.end());
        if (arch.output == OutputActivation::tanh_scaled) {
            const double bound = arch.output_bound;
            for (std::size_t i = 0; i < ws.delta.size(); i++) {
                const double y = ws.acts[layers][i];
                ws.delta[i] *= bound - y * y / bound;
            }
        }
        std::size_t off = arch.param_count();
        for (std::size_t li = layers; li-- > 0;) {
            const std::size_t n_in = arch.layer_sizes[li];
            const std::size_t n_out = arch.layer_sizes[li + 1];
            off -= (n_in + 1) * n_out;
            const double* w = params.data() + off;
            const std::vector<double>& in = ws.acts[li];
            ws.delta_prev.assign(n_in, 0.0);
            for (std::size_t i = 0; i < n_out; i++) {
                const double d = ws.delta[i];
                const double* wrow = w + i * n_in;
                for (std::size_t j = 0; j < n_in; j++)
                    ws.delta_prev[j] += wrow[j] * d;
            }
            if (li > 0)
                for (std::size_t j = 0; j < n_in; j++)
                    if (!(in[j] > 0.0))
                        ws.delta_prev[j] = 0.0;
            std::swap(ws.delta, ws.delta_prev);
        }
        for (std::size_t j = 0; j < input_grad.size(); j++)
            input_grad[j] = ws.delta[j];
    }

    // Gradients of <output, output_grad> w.r.t. parameters and input.
    // param_grad is accumulated into (callers zero it before a fresh pass);
    // input_grad is overwritten.
    inline void mlp_backward(const MlpArch& arch, std::span<const double> params,
        std::span<const double> input, std::span<const double> output_grad,
        std::span<double> param_grad, std::span<double> input_grad, MlpWorkspace& ws)
    {
        std::vector<double> out(arch.output_dim());
        mlp_forward(arch, params, input, out, ws);
        mlp_backward_cached(arch, params, output_grad, param_grad, input_grad, ws);
    }

    inline std::pair<ParamVector, std::vector<double>> mlp_backward(const MlpArch& arch,
        const ParamVector& params, const std::vector<double>& input,
        const std::vector<double>& output_grad)
    {
        MlpWorkspace ws;
        ParamVector param_grad(arch.param_count(), 0.0);
        std::vector<double> input_grad(arch.input_dim());
        mlp_backward(arch, params, input, output_grad, param_grad, input_grad, ws);
        return {std::move(param_grad), std::move(input_grad)};
    }

} // namespace dcgme
