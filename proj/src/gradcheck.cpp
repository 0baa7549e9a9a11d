#include "lse/gradcheck.hpp"

#include <cmath>
#include <optional>

#include "lse/error.hpp"
#include "lse/layer.hpp"
#include "lse/losses.hpp"
#include "lse/rng.hpp"

namespace lse {

namespace {

constexpr double kStep = 1e-5;
// Minimum distance from relu / MAE kink points; keeps the central quotient on
// one smooth branch while parameters move by kStep.
constexpr double kKinkMargin = 1e-3;

enum class LossKind { mae, crossentropy };

struct TestNet {
    std::vector<LayerParams> layers;  // plain stack, or encoder+decoder when multitask
    LossKind loss = LossKind::mae;
    Matrix input;
    Matrix target;            // mae
    std::vector<int> labels;  // crossentropy

    // Multitask parts.
    bool multitask = false;
    std::size_t encoder_len = 0;  // layers[0..encoder_len) encode, rest decode
    std::optional<LayerParams> head;
    double lambda = 0.0;
    bool head_classify = false;
    Matrix head_target;            // regression head
    std::vector<int> head_labels;  // classification head
    std::string description;
};

double evaluate(const TestNet& net) {
    if (!net.multitask) {
        Matrix h = net.input;
        for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) h = layer_forward(net.layers[i], h);
        if (net.loss == LossKind::crossentropy) {
            LayerCache cache;
            layer_forward(net.layers.back(), h, &cache);
            return softmax_crossentropy(cache.preact, net.labels).value;
        }
        h = layer_forward(net.layers.back(), h);
        return mae_loss(h, net.target).value;
    }
    Matrix h = net.input;
    for (std::size_t i = 0; i < net.encoder_len; ++i) h = layer_forward(net.layers[i], h);
    const Matrix latent = h;
    for (std::size_t i = net.encoder_len; i < net.layers.size(); ++i) h = layer_forward(net.layers[i], h);
    double loss = mae_loss(h, net.input).value;
    LayerCache head_cache;
    layer_forward(*net.head, latent, &head_cache);
    if (net.head_classify)
        loss += net.lambda * softmax_crossentropy(head_cache.preact, net.head_labels).value;
    else
        loss += net.lambda * mae_loss(head_cache.preact, net.head_target).value;
    return loss;
}

// Flattened analytic gradient, ordered layer by layer (weights then biases),
// head last.
std::vector<double> analytic_gradient(const TestNet& net) {
    std::vector<LayerCache> caches(net.layers.size());
    std::vector<LayerGrads> grads(net.layers.size());

    Matrix h = net.input;
    std::vector<Matrix> outs;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        h = layer_forward(net.layers[i], h, &caches[i]);
        outs.push_back(h);
    }

    LayerGrads head_grads;
    if (!net.multitask) {
        Matrix grad;
        std::size_t last = net.layers.size() - 1;
        if (net.loss == LossKind::crossentropy) {
            grad = softmax_crossentropy(caches[last].preact, net.labels).grad;
            grads[last] = affine_backward(net.layers[last], caches[last], grad);
        } else {
            grad = mae_loss(outs[last], net.target).grad;
            grads[last] = layer_backward(net.layers[last], caches[last], grad);
        }
        Matrix upstream = grads[last].input_grad;
        for (std::size_t i = last; i-- > 0;) {
            grads[i] = layer_backward(net.layers[i], caches[i], upstream);
            upstream = grads[i].input_grad;
        }
    } else {
        const Matrix& latent = outs[net.encoder_len - 1];
        LayerCache head_cache;
        layer_forward(*net.head, latent, &head_cache);
        LossResult task = net.head_classify
                              ? softmax_crossentropy(head_cache.preact, net.head_labels)
                              : mae_loss(head_cache.preact, net.head_target);
        for (double& g : task.grad.values()) g *= net.lambda;
        head_grads = affine_backward(*net.head, head_cache, task.grad);

        Matrix upstream = mae_loss(outs.back(), net.input).grad;
        for (std::size_t i = net.layers.size(); i-- > net.encoder_len;) {
            grads[i] = layer_backward(net.layers[i], caches[i], upstream);
            upstream = std::move(grads[i].input_grad);
        }
        auto& up = upstream.values();
        const auto& hg = head_grads.input_grad.values();
        for (std::size_t i = 0; i < up.size(); ++i) up[i] += hg[i];
        for (std::size_t i = net.encoder_len; i-- > 0;) {
            grads[i] = layer_backward(net.layers[i], caches[i], upstream);
            upstream = grads[i].input_grad;
        }
    }

    std::vector<double> flat;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        flat.insert(flat.end(), grads[i].weight_grad.values().begin(), grads[i].weight_grad.values().end());
        flat.insert(flat.end(), grads[i].bias_grad.begin(), grads[i].bias_grad.end());
    }
    if (net.multitask) {
        flat.insert(flat.end(), head_grads.weight_grad.values().begin(), head_grads.weight_grad.values().end());
        flat.insert(flat.end(), head_grads.bias_grad.begin(), head_grads.bias_grad.end());
    }
    return flat;
}

std::vector<double*> parameter_pointers(TestNet& net) {
    std::vector<double*> ptrs;
    for (auto& layer : net.layers) {
        for (double& w : layer.weights.values()) ptrs.push_back(&w);
        for (double& b : layer.biases) ptrs.push_back(&b);
    }
    if (net.multitask) {
        for (double& w : net.head->weights.values()) ptrs.push_back(&w);
        for (double& b : net.head->biases) ptrs.push_back(&b);
    }
    return ptrs;
}

std::vector<double> numeric_gradient(TestNet& net) {
    std::vector<double*> params = parameter_pointers(net);
    std::vector<double> grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = *params[i];
        *params[i] = saved + kStep;
        const double up = evaluate(net);
        *params[i] = saved - kStep;
        const double down = evaluate(net);
        *params[i] = saved;
        grad[i] = (up - down) / (2.0 * kStep);
    }
    return grad;
}

// True when every relu pre-activation and every MAE residual sits clear of
// its kink.
bool away_from_kinks(const TestNet& net) {
    auto clear_of = [](double v) { return std::abs(v) > kKinkMargin; };

    Matrix h = net.input;
    std::vector<Matrix> outs;
    std::vector<LayerCache> caches(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        h = layer_forward(net.layers[i], h, &caches[i]);
        outs.push_back(h);
        if (net.layers[i].activation == Activation::relu)
            for (double z : caches[i].preact.values())
                if (!clear_of(z)) return false;
    }
    if (!net.multitask) {
        if (net.loss == LossKind::mae)
            for (std::size_t i = 0; i < outs.back().size(); ++i)
                if (!clear_of(outs.back().values()[i] - net.target.values()[i])) return false;
        return true;
    }
    for (std::size_t i = 0; i < outs.back().size(); ++i)
        if (!clear_of(outs.back().values()[i] - net.input.values()[i])) return false;
    if (!net.head_classify) {
        const Matrix pred = layer_forward(*net.head, outs[net.encoder_len - 1]);
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (!clear_of(pred.values()[i] - net.head_target.values()[i])) return false;
    }
    return true;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.normal();
    return m;
}

TestNet random_plain_net(Rng& rng) {
    TestNet net;
    const std::size_t depth = 2 + rng.below(3);  // 2..4 layers
    const std::size_t batch = 2 + rng.below(4);
    std::size_t in = 1 + rng.below(10);
    net.input = random_matrix(batch, in, rng);
    net.loss = rng.below(2) == 0 ? LossKind::mae : LossKind::crossentropy;

    std::string arch = std::to_string(in);
    for (std::size_t l = 0; l < depth; ++l) {
        const std::size_t out = 1 + rng.below(10);
        Activation act;
        if (l + 1 == depth) {
            if (net.loss == LossKind::crossentropy) act = Activation::identity;
            else act = rng.below(3) == 0 ? Activation::softmax : Activation::identity;
        } else {
            act = rng.below(4) == 0 ? Activation::identity : Activation::relu;
        }
        net.layers.push_back(he_init(in, out, act, rng));
        in = out;
        arch += "->" + std::to_string(out);
    }
    const std::size_t out_dim = net.layers.back().out_dim();
    if (net.loss == LossKind::crossentropy) {
        // Need at least 2 classes for a meaningful loss surface.
        if (out_dim < 2) net.layers.back() = he_init(net.layers.back().in_dim(), 2, Activation::identity, rng);
        for (std::size_t i = 0; i < batch; ++i)
            net.labels.push_back(static_cast<int>(rng.below(net.layers.back().out_dim())));
        net.description = "plain " + arch + " ce";
    } else {
        net.target = random_matrix(batch, net.layers.back().out_dim(), rng);
        net.description = "plain " + arch + " mae/" + activation_name(net.layers.back().activation);
    }
    return net;
}

TestNet random_multitask_net(Rng& rng) {
    TestNet net;
    net.multitask = true;
    const std::size_t batch = 3 + rng.below(3);
    const std::size_t n = 5 + rng.below(4);
    const std::size_t latent = 2 + rng.below(3);
    net.input = random_matrix(batch, n, rng);

    net.layers.push_back(he_init(n, 5, Activation::relu, rng));
    net.layers.push_back(he_init(5, 4, Activation::relu, rng));
    net.layers.push_back(he_init(4, latent, Activation::identity, rng));
    net.encoder_len = 3;
    net.layers.push_back(he_init(latent, 4, Activation::relu, rng));
    net.layers.push_back(he_init(4, 5, Activation::relu, rng));
    net.layers.push_back(he_init(5, n, Activation::identity, rng));

    net.lambda = 0.25 + rng.uniform();
    net.head_classify = rng.below(2) == 0;
    if (net.head_classify) {
        const std::size_t k = 2 + rng.below(3);
        net.head = he_init(latent, k, Activation::identity, rng);
        for (std::size_t i = 0; i < batch; ++i)
            net.head_labels.push_back(static_cast<int>(rng.below(k)));
    } else {
        net.head = he_init(latent, 1, Activation::identity, rng);
        net.head_target = random_matrix(batch, 1, rng);
    }
    net.description = "multitask " + std::to_string(n) + "->5->4->" + std::to_string(latent) +
                      (net.head_classify ? " ce-head" : " mae-head");
    return net;
}

}  // namespace

GradCheckReport run_gradient_check_suite(std::size_t n_networks, std::uint64_t seed) {
    if (n_networks < 1) throw usage_error("gradcheck: need at least 1 network");
    Rng rng(seed);
    GradCheckReport report;

    for (std::size_t k = 0; k < n_networks; ++k) {
        const bool multitask = (k == n_networks / 2);  // exactly one multitask variant
        TestNet net;
        int attempts = 0;
        do {
            net = multitask ? random_multitask_net(rng) : random_plain_net(rng);
            if (++attempts > 200)
                throw lse::runtime_error("gradcheck: could not sample a kink-free network");
        } while (!away_from_kinks(net));

        const std::vector<double> analytic = analytic_gradient(net);
        const std::vector<double> numeric = numeric_gradient(net);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1.0});
            const double rel = std::abs(analytic[i] - numeric[i]) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_case = net.description;
            }
        }
        report.parameters_checked += analytic.size();
        ++report.networks_checked;
    }
    return report;
}

}  // namespace lse
