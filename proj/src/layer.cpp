#include "lse/layer.hpp"

#include <cmath>
#include <string>

#include "lse/error.hpp"

namespace lse {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::identity: return "identity";
        case Activation::softmax: return "softmax";
    }
    return "?";
}

namespace {

void softmax_rows_inplace(Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* r = m.row(i);
        double mx = r[0];
        for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, r[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            r[j] = std::exp(r[j] - mx);
            sum += r[j];
        }
        for (std::size_t j = 0; j < m.cols(); ++j) r[j] /= sum;
    }
}

}  // namespace

Matrix layer_forward(const LayerParams& p, const Matrix& x, LayerCache* cache) {
    if (x.cols() != p.in_dim())
        throw usage_error("layer_forward: input has " + std::to_string(x.cols()) +
                          " columns, layer expects " + std::to_string(p.in_dim()));
    Matrix preact = matmul(x, p.weights);
    for (std::size_t i = 0; i < preact.rows(); ++i) {
        double* r = preact.row(i);
        for (std::size_t j = 0; j < preact.cols(); ++j) r[j] += p.biases[j];
    }
    if (cache) {
        cache->input = x;
        cache->preact = preact;
    }
    Matrix out = std::move(preact);
    switch (p.activation) {
        case Activation::identity:
            break;
        case Activation::relu:
            for (double& v : out.values())
                if (v < 0.0) v = 0.0;
            break;
        case Activation::softmax:
            softmax_rows_inplace(out);
            break;
    }
    return out;
}

LayerGrads layer_backward(const LayerParams& p, const LayerCache& cache, const Matrix& upstream_grad) {
    if (upstream_grad.rows() != cache.preact.rows() || upstream_grad.cols() != cache.preact.cols())
        throw usage_error("layer_backward: upstream gradient is " + std::to_string(upstream_grad.rows()) +
                          "x" + std::to_string(upstream_grad.cols()) + ", expected " +
                          std::to_string(cache.preact.rows()) + "x" + std::to_string(cache.preact.cols()));

    // Gradient w.r.t. the pre-activation.
    Matrix dz = upstream_grad;
    switch (p.activation) {
        case Activation::identity:
            break;
        case Activation::relu: {
            const auto& z = cache.preact.values();
            auto& g = dz.values();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (z[i] <= 0.0) g[i] = 0.0;
            break;
        }
        case Activation::softmax: {
            // dz_j = s_j * (g_j - sum_k g_k s_k), row-wise.
            Matrix s = cache.preact;
            softmax_rows_inplace(s);
            for (std::size_t i = 0; i < dz.rows(); ++i) {
                const double* si = s.row(i);
                double* gi = dz.row(i);
                double dot = 0.0;
                for (std::size_t j = 0; j < dz.cols(); ++j) dot += gi[j] * si[j];
                for (std::size_t j = 0; j < dz.cols(); ++j) gi[j] = si[j] * (gi[j] - dot);
            }
            break;
        }
    }

    return affine_backward(p, cache, dz);
}

LayerGrads affine_backward(const LayerParams& p, const LayerCache& cache, const Matrix& preact_grad) {
    LayerGrads grads;
    grads.weight_grad = matmul_at_b(cache.input, preact_grad);
    grads.bias_grad.assign(p.out_dim(), 0.0);
    for (std::size_t i = 0; i < preact_grad.rows(); ++i) {
        const double* r = preact_grad.row(i);
        for (std::size_t j = 0; j < preact_grad.cols(); ++j) grads.bias_grad[j] += r[j];
    }
    grads.input_grad = matmul_a_bt(preact_grad, p.weights);
    return grads;
}

LayerParams he_init(std::size_t in_dim, std::size_t out_dim, Activation activation, Rng& rng) {
    if (in_dim < 1 || out_dim < 1)
        throw usage_error("he_init: dimensions must be >= 1");
    LayerParams p;
    p.weights = Matrix(in_dim, out_dim);
    const double scale = std::sqrt(2.0 / static_cast<double>(in_dim));
    for (double& w : p.weights.values()) w = scale * rng.normal();
    p.biases.assign(out_dim, 0.0);
    p.activation = activation;
    return p;
}

}  // namespace lse
