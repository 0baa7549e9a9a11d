#pragma once

#include <vector>

#include "lse/matrix.hpp"
#include "lse/rng.hpp"

namespace lse {

enum class Activation { relu, identity, softmax };

const char* activation_name(Activation a);

// One dense layer: out = activation(x*W + b), W is in_dim x out_dim.
struct LayerParams {
    Matrix weights;
    std::vector<double> biases;
    Activation activation = Activation::identity;

    std::size_t in_dim() const { return weights.rows(); }
    std::size_t out_dim() const { return weights.cols(); }
};

// Forward-pass byproducts needed by the backward pass.
struct LayerCache {
    Matrix input;
    Matrix preact;
};

struct LayerGrads {
    Matrix input_grad;
    Matrix weight_grad;
    std::vector<double> bias_grad;
};

// Returns activation(x*W + b), bias broadcast per row. When cache is given it
// is filled for a later layer_backward call.
Matrix layer_forward(const LayerParams& p, const Matrix& x, LayerCache* cache = nullptr);

// Exact gradients chained with upstream_grad. relu uses subgradient 0 at 0.
LayerGrads layer_backward(const LayerParams& p, const LayerCache& cache, const Matrix& upstream_grad);

// Backward pass given the gradient at the pre-activation, skipping the
// activation chain. Used when a loss differentiates through its own
// activation (softmax cross-entropy on logits).
LayerGrads affine_backward(const LayerParams& p, const LayerCache& cache, const Matrix& preact_grad);

// He-initialized layer: weights ~ N(0, 2/in_dim), zero biases.
LayerParams he_init(std::size_t in_dim, std::size_t out_dim, Activation activation, Rng& rng);

}  // namespace lse
