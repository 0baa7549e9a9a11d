#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lse/adam.hpp"
#include "lse/error.hpp"
#include "lse/gradcheck.hpp"
#include "lse/layer.hpp"
#include "lse/losses.hpp"
#include "lse/matrix.hpp"
#include "lse/rng.hpp"
#include "support/oracles.hpp"

using namespace lse;

TEST_CASE("matmul identity and hand product") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    CHECK(matmul(a, Matrix::identity(2)) == a);

    const Matrix b = Matrix::from_rows({{5}, {6}});
    const Matrix c = matmul(a, b);
    CHECK(c.rows() == 2);
    CHECK(c.cols() == 1);
    CHECK(c(0, 0) == 17.0);
    CHECK(c(1, 0) == 39.0);
}

TEST_CASE("matmul rejects mismatched shapes naming both") {
    const Matrix a(2, 3), b(2, 2);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), Error);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x2"), Error);
}

TEST_CASE("matmul transposed variants agree with explicit transpose") {
    Rng rng(7);
    Matrix a(5, 4), b(5, 3), c(4, 3);
    for (double& v : a.values()) v = rng.normal();
    for (double& v : b.values()) v = rng.normal();
    for (double& v : c.values()) v = rng.normal();
    CHECK(matmul_at_b(a, b) == matmul(transpose(a), b));
    CHECK(matmul_a_bt(b, c) == matmul(b, transpose(c)));
}

TEST_CASE("matmul is bitwise identical across thread counts") {
    Rng rng(11);
    Matrix a(97, 33), b(33, 21);
    for (double& v : a.values()) v = rng.normal();
    for (double& v : b.values()) v = rng.normal();
    set_num_threads(1);
    const Matrix single = matmul(a, b);
    const Matrix single_t = matmul_at_b(a, b);
    set_num_threads(4);
    CHECK(matmul(a, b) == single);
    CHECK(matmul_at_b(a, b) == single_t);
    set_num_threads(1);
}

TEST_CASE("layer_forward applies relu and broadcasts biases") {
    LayerParams p;
    p.weights = Matrix::identity(3);
    p.biases = {0, 0, 0};
    p.activation = Activation::relu;
    const Matrix out = layer_forward(p, Matrix::from_rows({{-1, 0, 2}}));
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 0.0);
    CHECK(out(0, 2) == 2.0);

    LayerParams affine;
    affine.weights = Matrix(3, 2, 0.0);
    affine.biases = {1, 2};
    affine.activation = Activation::identity;
    const Matrix rows = layer_forward(affine, Matrix(4, 3, 0.5));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rows(i, 0) == 1.0);
        CHECK(rows(i, 1) == 2.0);
    }
}

TEST_CASE("layer_forward shape contract") {
    Rng rng(1);
    const LayerParams p = he_init(784, 128, Activation::relu, rng);
    Matrix x(100, 784, 0.1);
    const Matrix out = layer_forward(p, x);
    CHECK(out.rows() == 100);
    CHECK(out.cols() == 128);
    CHECK_THROWS_AS(layer_forward(p, Matrix(5, 10)), Error);
}

TEST_CASE("layer_backward gates gradients through relu") {
    LayerParams p;
    p.weights = Matrix::identity(2);
    p.biases = {0, 0};
    p.activation = Activation::relu;
    LayerCache cache;
    layer_forward(p, Matrix::from_rows({{-1, 2}}), &cache);
    const LayerGrads grads = layer_backward(p, cache, Matrix::from_rows({{5, 5}}));
    CHECK(grads.input_grad(0, 0) == 0.0);
    CHECK(grads.input_grad(0, 1) == 5.0);
    CHECK(grads.bias_grad[0] == 0.0);
    CHECK(grads.bias_grad[1] == 5.0);
}

TEST_CASE("dead relu layer produces all-zero gradients") {
    LayerParams p;
    p.weights = Matrix::identity(2);
    p.biases = {-10, -10};
    p.activation = Activation::relu;
    LayerCache cache;
    layer_forward(p, Matrix::from_rows({{1, 2}, {3, 1}}), &cache);
    const LayerGrads grads = layer_backward(p, cache, Matrix(2, 2, 1.0));
    for (double g : grads.weight_grad.values()) CHECK(g == 0.0);
    for (double g : grads.bias_grad) CHECK(g == 0.0);
    for (double g : grads.input_grad.values()) CHECK(g == 0.0);
}

TEST_CASE("backprop matches finite differences on a random 7-5-3 net") {
    Rng rng(42);
    std::vector<LayerParams> layers;
    layers.push_back(he_init(7, 5, Activation::relu, rng));
    layers.push_back(he_init(5, 3, Activation::identity, rng));
    Matrix x(4, 7);
    for (double& v : x.values()) v = rng.normal();
    Matrix target(4, 3);
    for (double& v : target.values()) v = rng.normal();

    auto eval = [&]() {
        Matrix h = x;
        for (const auto& l : layers) h = layer_forward(l, h);
        return mae_loss(h, target).value;
    };

    std::vector<LayerCache> caches(2);
    Matrix h = x;
    for (std::size_t i = 0; i < 2; ++i) h = layer_forward(layers[i], h, &caches[i]);
    LossResult loss = mae_loss(h, target);
    LayerGrads g1 = layer_backward(layers[1], caches[1], loss.grad);
    LayerGrads g0 = layer_backward(layers[0], caches[0], g1.input_grad);

    const double h_step = 1e-5;
    auto check_tensor = [&](Matrix& params, const Matrix& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params.values()[i];
            params.values()[i] = saved + h_step;
            const double up = eval();
            params.values()[i] = saved - h_step;
            const double down = eval();
            params.values()[i] = saved;
            const double numeric = (up - down) / (2 * h_step);
            const double denom = std::max({std::abs(numeric), std::abs(analytic.values()[i]), 1.0});
            CHECK(std::abs(numeric - analytic.values()[i]) / denom < 1e-4);
        }
    };
    check_tensor(layers[0].weights, g0.weight_grad);
    check_tensor(layers[1].weights, g1.weight_grad);
}

TEST_CASE("mae_loss values and subgradient") {
    const Matrix same = Matrix::from_rows({{1, 2}, {3, 4}});
    CHECK(mae_loss(same, same).value == 0.0);

    const LossResult r = mae_loss(Matrix::from_rows({{0, 0}}), Matrix::from_rows({{1, 3}}));
    CHECK(r.value == doctest::Approx(2.0));
    CHECK(r.grad(0, 0) == -0.5);

    // pred > target cell carries +1/(n*d)
    const LossResult r2 = mae_loss(Matrix::from_rows({{5, 0}, {0, 0}}), Matrix(2, 2, 0.0));
    CHECK(r2.grad(0, 0) == 0.25);
    CHECK(r2.grad(1, 1) == 0.0);  // sign(0) = 0
}

TEST_CASE("mae_loss is invariant under simultaneous row permutation") {
    Rng rng(9);
    Matrix pred(6, 3), target(6, 3);
    for (double& v : pred.values()) v = rng.normal();
    for (double& v : target.values()) v = rng.normal();
    const double base = mae_loss(pred, target).value;
    const std::vector<std::size_t> perm = rng.permutation(6);
    CHECK(mae_loss(pred.select_rows(perm), target.select_rows(perm)).value == doctest::Approx(base));
}

TEST_CASE("softmax cross-entropy analytic values") {
    Matrix uniform(3, 4, 0.0);
    const LossResult r = softmax_crossentropy(uniform, {0, 1, 2});
    CHECK(r.value == doctest::Approx(std::log(4.0)).epsilon(1e-9));

    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 4; ++j) sum += r.grad(i, j);
        CHECK(std::abs(sum) < 1e-12);
    }

    Matrix saturated(1, 3, 0.0);
    saturated(0, 1) = 1000.0;
    CHECK(softmax_crossentropy(saturated, {1}).value < 1e-6);

    CHECK_THROWS_AS(softmax_crossentropy(uniform, {0, 4, 1}), Error);
}

TEST_CASE("he_init shape, determinism and spread") {
    Rng rng_a(5), rng_b(5);
    const LayerParams a = he_init(784, 128, Activation::relu, rng_a);
    CHECK(a.weights.rows() == 784);
    CHECK(a.weights.cols() == 128);
    CHECK(a.biases.size() == 128);
    for (double b : a.biases) CHECK(b == 0.0);

    const LayerParams b = he_init(784, 128, Activation::relu, rng_b);
    CHECK(a.weights == b.weights);

    Rng rng_c(13);
    const LayerParams c = he_init(128, 128, Activation::relu, rng_c);
    double ss = 0.0;
    for (double w : c.weights.values()) ss += w * w;
    const double sample_std = std::sqrt(ss / static_cast<double>(c.weights.size()));
    const double expected = std::sqrt(2.0 / 128.0);
    CHECK(sample_std == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("adam zero gradient is the identity on fresh state") {
    AdamState state(3, AdamConfig{});
    std::vector<double> params{1.0, -2.0, 0.5};
    const std::vector<double> before = params;
    std::vector<double> grads{0.0, 0.0, 0.0};
    state.update(params, grads);
    CHECK(params == before);
    CHECK(state.step() == 1);
}

TEST_CASE("adam first step moves by about lr in the gradient direction") {
    const double lr = 0.0001;
    AdamState state(2, AdamConfig{lr});
    std::vector<double> params{1.0, 1.0};
    std::vector<double> grads{3.0, -0.25};
    state.update(params, grads);
    CHECK(std::abs(std::abs(params[0] - 1.0) - lr) < 1e-6 * lr);
    CHECK(params[0] < 1.0);
    CHECK(params[1] > 1.0);
}

TEST_CASE("adam agrees with the scalar reference recurrence") {
    const double lr = 0.01;
    AdamState state(1, AdamConfig{lr});
    oracles::ScalarAdam reference{lr};
    std::vector<double> params{0.7};
    double ref_param = 0.7;
    for (double g : {1.3, -0.4, 0.9, 0.0, 2.2}) {
        std::vector<double> grads{g};
        state.update(params, grads);
        ref_param = reference.step(ref_param, g);
        CHECK(params[0] == doctest::Approx(ref_param).epsilon(1e-12));
    }
}

TEST_CASE("adam rejects mismatched shapes") {
    AdamState state(3, AdamConfig{});
    std::vector<double> params{1.0, 2.0};
    std::vector<double> grads{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(state.update(params, grads), Error);
}

TEST_CASE("rng streams are reproducible and permutations are exact") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(5);
    const std::vector<std::size_t> perm = c.permutation(257);
    std::vector<bool> seen(257, false);
    for (std::size_t v : perm) {
        CHECK(v < 257);
        CHECK(!seen[v]);
        seen[v] = true;
    }

    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
}

TEST_CASE("rng normal moments are sane") {
    Rng rng(2024);
    double sum = 0.0, ss = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        ss += v * v;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(ss / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("gradient check suite stays under the acceptance threshold") {
    const GradCheckReport report = run_gradient_check_suite(10, 99);
    CHECK(report.networks_checked == 10);
    CHECK(report.parameters_checked > 100);
    CHECK(report.max_rel_error < 1e-4);
}
