#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <vector>

#include <dcgme/adam.hpp>
#include <dcgme/nn.hpp>
#include <dcgme/rng.hpp>
#include <dcgme/serialize.hpp>

using namespace dcgme;

namespace {

    // Independent layer-by-layer evaluation used as the forward oracle.
    // Walks the parameter layout explicitly with (W, b) matrices.
    std::vector<double> forward_oracle(const MlpArch& arch, const ParamVector& params,
        std::vector<double> x)
    {
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); l++) {
            const std::size_t n_in = arch.layer_sizes[l];
            const std::size_t n_out = arch.layer_sizes[l + 1];
            std::vector<std::vector<double>> w(n_out, std::vector<double>(n_in));
            for (std::size_t i = 0; i < n_out; i++)
                for (std::size_t j = 0; j < n_in; j++)
                    w[i][j] = params[off + i * n_in + j];
            std::vector<double> b(params.begin() + off + n_in * n_out,
                params.begin() + off + n_in * n_out + n_out);
            std::vector<double> y(n_out);
            for (std::size_t i = 0; i < n_out; i++)
                y[i] = std::inner_product(w[i].begin(), w[i].end(), x.begin(), b[i]);
            if (l + 2 < arch.layer_sizes.size()) {
                for (double& v : y)
                    v = std::max(0.0, v);
            } else if (arch.output == OutputActivation::tanh_scaled) {
                for (double& v : y)
                    v = arch.output_bound * std::tanh(v);
            }
            x = std::move(y);
            off += (n_in + 1) * n_out;
        }
        return x;
    }

    double scalar_of(const MlpArch& arch, const ParamVector& params,
        const std::vector<double>& input, const std::vector<double>& g)
    {
        std::vector<double> y = mlp_forward(arch, params, input);
        return std::inner_product(y.begin(), y.end(), g.begin(), 0.0);
    }

    MlpArch random_arch(Rng& rng)
    {
        const std::size_t depth = 2 + rng.uniform_index(3); // 2..4 layers of weights
        std::vector<std::size_t> sizes;
        for (std::size_t i = 0; i <= depth; i++)
            sizes.push_back(1 + rng.uniform_index(7));
        const bool tanh_out = rng.uniform() < 0.5;
        return mlp_arch(std::move(sizes),
            tanh_out ? OutputActivation::tanh_scaled : OutputActivation::identity,
            tanh_out ? 0.5 + rng.uniform() : 1.0);
    }

    ParamVector random_params(const MlpArch& arch, Rng& rng)
    {
        ParamVector p(arch.param_count());
        for (double& v : p)
            v = rng.gaussian(0.0, 0.7);
        return p;
    }

} // namespace

TEST_CASE("parameter count follows sum (n_in+1)*n_out")
{
    CHECK(mlp_arch({2, 3, 1}, OutputActivation::identity).param_count() == 13);
    // published policy/actor shapes for the locomotion suites
    CHECK(mlp_arch({19, 128, 128, 6}, OutputActivation::tanh_scaled).param_count() == 19846);
    CHECK(mlp_arch({29, 128, 128, 8}, OutputActivation::tanh_scaled).param_count() == 21384);
    CHECK(mlp_arch({48, 128, 128, 18}, OutputActivation::tanh_scaled).param_count() == 25106);
}

TEST_CASE("mlp_init zeroes biases and is seed-deterministic")
{
    const MlpArch arch = mlp_arch({2, 3, 1}, OutputActivation::identity);
    const ParamVector p = mlp_init(arch, 7);
    REQUIRE(p.size() == 13);
    // layer 0: W 3x2 then b(3) at 6..8; layer 1: W 1x3 then b(1) at 12
    for (std::size_t i : {6u, 7u, 8u, 12u})
        CHECK(p[i] == 0.0);
    // fan-in bound per layer
    for (std::size_t i = 0; i < 6; i++)
        CHECK(std::abs(p[i]) <= 1.0 / std::sqrt(2.0));
    for (std::size_t i = 9; i < 12; i++)
        CHECK(std::abs(p[i]) <= 1.0 / std::sqrt(3.0));

    const ParamVector q = mlp_init(arch, 7);
    CHECK(p == q);
    const ParamVector r = mlp_init(arch, 8);
    CHECK(p != r);
}

TEST_CASE("forward: zero parameters give zero output")
{
    const MlpArch id_arch = mlp_arch({3, 4, 2}, OutputActivation::identity);
    const MlpArch tanh_arch = mlp_arch({3, 4, 2}, OutputActivation::tanh_scaled, 1.0);
    const ParamVector zeros(id_arch.param_count(), 0.0);
    const std::vector<double> input{0.3, -1.2, 2.0};
    for (double y : mlp_forward(id_arch, zeros, input))
        CHECK(y == 0.0);
    for (double y : mlp_forward(tanh_arch, zeros, input))
        CHECK(y == 0.0);
}

TEST_CASE("forward matches independent layer-by-layer oracle")
{
    Rng rng(31);
    for (int trial = 0; trial < 25; trial++) {
        const MlpArch arch = random_arch(rng);
        const ParamVector params = random_params(arch, rng);
        std::vector<double> input(arch.input_dim());
        for (double& v : input)
            v = rng.gaussian();
        const std::vector<double> got = mlp_forward(arch, params, input);
        const std::vector<double> want = forward_oracle(arch, params, input);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); i++)
            CHECK_THAT(got[i], Catch::Matchers::WithinAbs(want[i], 1e-12));
    }
}

TEST_CASE("forward is deterministic bit for bit")
{
    Rng rng(5);
    const MlpArch arch = mlp_arch({4, 8, 8, 3}, OutputActivation::tanh_scaled, 2.0);
    const ParamVector params = random_params(arch, rng);
    const std::vector<double> input{0.1, -0.5, 0.9, 1.4};
    const auto a = mlp_forward(arch, params, input);
    const auto b = mlp_forward(arch, params, input);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("forward rejects dimension mismatch")
{
    const MlpArch arch = mlp_arch({3, 4, 2}, OutputActivation::identity);
    const ParamVector params(arch.param_count(), 0.0);
    CHECK_THROWS_AS(mlp_forward(arch, params, std::vector<double>{1.0, 2.0}),
        std::invalid_argument);
}

TEST_CASE("backward: zero output grad gives zero gradients")
{
    Rng rng(11);
    const MlpArch arch = mlp_arch({3, 5, 2}, OutputActivation::tanh_scaled, 1.0);
    const ParamVector params = random_params(arch, rng);
    auto [pg, ig] = mlp_backward(arch, params, {0.4, 0.1, -0.2}, {0.0, 0.0});
    for (double v : pg)
        CHECK(v == 0.0);
    for (double v : ig)
        CHECK(v == 0.0);
}

TEST_CASE("backward: single linear layer closed form")
{
    // y = Wx + b with W 2x3; param_grad rows are g x^T, input_grad is W^T g
    const MlpArch arch = mlp_arch({3, 2}, OutputActivation::identity);
    const ParamVector w{1.0, -2.0, 0.5, /* row 1 */ 3.0, 0.0, -1.0, /* b */ 0.7, -0.3};
    const std::vector<double> x{0.2, -0.6, 1.5};
    const std::vector<double> g{2.0, -1.0};
    auto [pg, ig] = mlp_backward(arch, w, x, g);
    const std::vector<double> expect_w{g[0] * x[0], g[0] * x[1], g[0] * x[2],
        g[1] * x[0], g[1] * x[1], g[1] * x[2], g[0], g[1]};
    for (std::size_t i = 0; i < pg.size(); i++)
        CHECK_THAT(pg[i], Catch::Matchers::WithinAbs(expect_w[i], 1e-15));
    const std::vector<double> expect_in{1.0 * 2.0 + 3.0 * -1.0, -2.0 * 2.0 + 0.0,
        0.5 * 2.0 + -1.0 * -1.0};
    for (std::size_t i = 0; i < ig.size(); i++)
        CHECK_THAT(ig[i], Catch::Matchers::WithinAbs(expect_in[i], 1e-15));
}

TEST_CASE("backward matches central finite differences on random nets")
{
    Rng rng(71);
    int checked = 0;
    for (int trial = 0; trial < 50; trial++) {
        const MlpArch arch = random_arch(rng);
        const ParamVector params = random_params(arch, rng);
        std::vector<double> input(arch.input_dim());
        for (double& v : input)
            v = rng.gaussian();
        std::vector<double> g(arch.output_dim());
        for (double& v : g)
            v = rng.gaussian();

        auto [pg, ig] = mlp_backward(arch, params, input, g);

        const double h = 1e-6;
        ParamVector p = params;
        for (std::size_t i = 0; i < p.size(); i++) {
            p[i] = params[i] + h;
            const double fp = scalar_of(arch, p, input, g);
            p[i] = params[i] - h;
            const double fm = scalar_of(arch, p, input, g);
            p[i] = params[i];
            const double fd = (fp - fm) / (2.0 * h);
            const double denom = std::max({std::abs(fd), std::abs(pg[i]), 1e-3});
            CHECK(std::abs(fd - pg[i]) / denom < 1e-4);
        }
        std::vector<double> in = input;
        for (std::size_t i = 0; i < in.size(); i++) {
            in[i] = input[i] + h;
            const double fp = scalar_of(arch, params, in, g);
            in[i] = input[i] - h;
            const double fm = scalar_of(arch, params, in, g);
            in[i] = input[i];
            const double fd = (fp - fm) / (2.0 * h);
            const double denom = std::max({std::abs(fd), std::abs(ig[i]), 1e-3});
            CHECK(std::abs(fd - ig[i]) / denom < 1e-4);
        }
        checked++;
    }
    REQUIRE(checked == 50);
}

TEST_CASE("adam: zero gradient with zero moments is a no-op")
{
    ParamVector p{1.0, -2.0, 3.0};
    AdamState st = make_adam(0.1, p.size());
    const ParamVector before = p;
    adam_step(st, p, ParamVector(3, 0.0));
    CHECK(p == before);
    CHECK(st.step_count == 1);
}

TEST_CASE("adam: first step has closed form")
{
    // at t=1, update is -lr * g / (|g| + eps)
    ParamVector p{0.5, -0.5, 2.0};
    const ParamVector g{0.3, -4.0, 1e-3};
    AdamState st = make_adam(0.01, p.size());
    const ParamVector before = p;
    adam_step(st, p, g);
    for (std::size_t i = 0; i < p.size(); i++) {
        const double want = before[i] - 0.01 * g[i] / (std::abs(g[i]) + st.epsilon);
        CHECK_THAT(p[i], Catch::Matchers::WithinAbs(want, 1e-15));
    }
}

TEST_CASE("adam: matches an independent scalar simulation on f(p)=p^2")
{
    ParamVector p{1.0};
    AdamState st = make_adam(0.1, 1);

    // independent scalar re-implementation
    double q = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 100; t++) {
        adam_step(st, p, ParamVector{2.0 * p[0]});

        const double g = 2.0 * q;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1.0 - std::pow(0.9, t));
        const double vh = v / (1.0 - std::pow(0.999, t));
        q -= 0.1 * mh / (std::sqrt(vh) + 1e-8);

        REQUIRE_THAT(p[0], Catch::Matchers::WithinAbs(q, 1e-14));
        if (t <= 5)
            REQUIRE(std::abs(p[0]) < (t == 1 ? 1.0 : std::abs(q) + 1.0)); // decreasing early
    }
    CHECK(std::abs(p[0]) < 0.05); // driven toward the minimum
}

TEST_CASE("adam rejects shape mismatch")
{
    ParamVector p{1.0, 2.0};
    AdamState st = make_adam(0.1, 3);
    CHECK_THROWS_AS(adam_step(st, p, ParamVector{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("param vector and arch round-trip through disk")
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dcgme_nn_io_test";
    fs::create_directories(dir);

    Rng rng(9);
    const MlpArch arch = mlp_arch({5, 16, 3}, OutputActivation::tanh_scaled, 1.5);
    const ParamVector params = random_params(arch, rng);

    save_policy(dir / "pol", arch, params);
    auto [arch2, params2] = load_policy(dir / "pol");
    CHECK(arch2 == arch);
    REQUIRE(params2.size() == params.size());
    CHECK(std::memcmp(params.data(), params2.data(), params.size() * sizeof(double)) == 0);

    fs::remove_all(dir);
}
