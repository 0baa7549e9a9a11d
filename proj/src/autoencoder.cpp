#include "lse/autoencoder.hpp"

#include <cmath>
#include <string>

#include "lse/adam.hpp"
#include "lse/error.hpp"
#include "lse/losses.hpp"

namespace lse {

namespace {

void validate_config(const AutoencoderConfig& cfg) {
    if (cfg.input_dim < 1) throw usage_error("autoencoder: input_dim must be >= 1");
    if (cfg.latent_dim < 1) throw usage_error("autoencoder: latent_dim must be >= 1");
    for (std::size_t h : cfg.encoder_hidden)
        if (h < 1) throw usage_error("autoencoder: hidden sizes must be >= 1");
    if (cfg.multitask) {
        if (cfg.multitask->lambda < 0.0)
            throw usage_error("autoencoder: multitask lambda must be >= 0");
        if (cfg.multitask->task == Task::classification && cfg.multitask->head_classes < 2)
            throw usage_error("autoencoder: classification head needs head_classes >= 2");
    }
}

}  // namespace

AutoencoderModel build_autoencoder(const AutoencoderConfig& cfg, Rng& rng) {
    validate_config(cfg);
    AutoencoderModel model;
    model.config = cfg;

    // Encoder: N -> hidden... -> M; hidden layers relu, latent identity.
    std::size_t in = cfg.input_dim;
    for (std::size_t h : cfg.encoder_hidden) {
        model.encoder.push_back(he_init(in, h, Activation::relu, rng));
        in = h;
    }
    model.encoder.push_back(he_init(in, cfg.latent_dim, Activation::identity, rng));

    // Decoder mirrors the encoder dimensions in reverse; output identity.
    in = cfg.latent_dim;
    for (auto it = cfg.encoder_hidden.rbegin(); it != cfg.encoder_hidden.rend(); ++it) {
        model.decoder.push_back(he_init(in, *it, Activation::relu, rng));
        in = *it;
    }
    model.decoder.push_back(he_init(in, cfg.input_dim, Activation::identity, rng));

    if (cfg.multitask) {
        const bool classify = cfg.multitask->task == Task::classification;
        const std::size_t out = classify ? cfg.multitask->head_classes : 1;
        model.head = he_init(cfg.latent_dim, out,
                             classify ? Activation::softmax : Activation::identity, rng);
    }
    return model;
}

namespace {

Matrix forward_stack(const std::vector<LayerParams>& layers, const Matrix& x,
                     std::vector<LayerCache>* caches) {
    Matrix h = x;
    for (std::size_t i = 0; i < layers.size(); ++i)
        h = layer_forward(layers[i], h, caches ? &(*caches)[i] : nullptr);
    return h;
}

// Backprop through a stack; returns the gradient w.r.t. the stack input and
// fills per-layer parameter gradients.
Matrix backward_stack(const std::vector<LayerParams>& layers, const std::vector<LayerCache>& caches,
                      Matrix grad, std::vector<LayerGrads>& out) {
    for (std::size_t i = layers.size(); i-- > 0;) {
        out[i] = layer_backward(layers[i], caches[i], grad);
        grad = std::move(out[i].input_grad);
    }
    return grad;
}

struct StackOptimizer {
    std::vector<AdamState> weight_states;
    std::vector<AdamState> bias_states;

    StackOptimizer(const std::vector<LayerParams>& layers, const AdamConfig& cfg) {
        for (const auto& layer : layers) {
            weight_states.emplace_back(layer.weights.size(), cfg);
            bias_states.emplace_back(layer.biases.size(), cfg);
        }
    }

    void apply(std::vector<LayerParams>& layers, const std::vector<LayerGrads>& grads) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            weight_states[i].update(layers[i].weights.values(), grads[i].weight_grad.values());
            bias_states[i].update(layers[i].biases, grads[i].bias_grad);
        }
    }
};

struct TargetView {
    // Regression targets standardized on the training partition; class labels
    // for classification.
    std::vector<double> regression;
    std::vector<int> labels;
    double mean = 0.0;
    double stddev = 1.0;
};

TargetView prepare_targets(const AutoencoderModel& model, const std::vector<double>& y_train) {
    TargetView view;
    const auto& mt = *model.config.multitask;
    if (mt.task == Task::classification) {
        view.labels.reserve(y_train.size());
        for (std::size_t i = 0; i < y_train.size(); ++i) {
            const double v = y_train[i];
            if (!(v >= 0.0) || v != std::floor(v) ||
                v >= static_cast<double>(mt.head_classes))
                throw data_error("multitask: label " + std::to_string(v) + " at row " +
                                 std::to_string(i) + " outside [0, " +
                                 std::to_string(mt.head_classes) + ")");
            view.labels.push_back(static_cast<int>(v));
        }
        return view;
    }
    double sum = 0.0;
    for (double v : y_train) sum += v;
    view.mean = sum / static_cast<double>(y_train.size());
    double ss = 0.0;
    for (double v : y_train) ss += (v - view.mean) * (v - view.mean);
    view.stddev = std::sqrt(ss / static_cast<double>(y_train.size()));
    if (view.stddev <= 0.0) view.stddev = 1.0;
    view.regression.reserve(y_train.size());
    for (double v : y_train) view.regression.push_back((v - view.mean) / view.stddev);
    return view;
}

struct EpochLoss {
    double total = 0.0;
    double recon = 0.0;
    double task = 0.0;
};

TrainHistory train_impl(AutoencoderModel& model, const Matrix& x_train,
                        const std::vector<double>* y_train, const Matrix& x_val,
                        const std::vector<double>* y_val, const TrainConfig& tc) {
    if (tc.epochs < 1) throw usage_error("train: epochs must be >= 1");
    if (tc.batch_size < 1) throw usage_error("train: batch_size must be >= 1");
    if (x_train.cols() != model.input_dim())
        throw usage_error("train: input has " + std::to_string(x_train.cols()) +
                          " columns, model expects " + std::to_string(model.input_dim()));
    if (x_train.rows() == 0) throw usage_error("train: empty training set");
    const bool multitask = y_train != nullptr;
    if (multitask && !model.head)
        throw usage_error("train: multitask training requires a model built with a task head");
    if (multitask && y_train->size() != x_train.rows())
        throw usage_error("train: " + std::to_string(y_train->size()) + " targets for " +
                          std::to_string(x_train.rows()) + " rows");

    const double lambda = multitask ? model.config.multitask->lambda : 0.0;
    const bool classify = multitask && model.config.multitask->task == Task::classification;
    TargetView targets;
    if (multitask) targets = prepare_targets(model, *y_train);
    TargetView val_targets;
    if (multitask && y_val && !y_val->empty()) {
        val_targets = prepare_targets(model, *y_val);
        if (!classify) {
            // Validation targets share the training standardization.
            val_targets.regression.clear();
            for (double v : *y_val)
                val_targets.regression.push_back((v - targets.mean) / targets.stddev);
        }
    }

    const AdamConfig adam{tc.learning_rate};
    StackOptimizer enc_opt(model.encoder, adam);
    StackOptimizer dec_opt(model.decoder, adam);
    std::optional<AdamState> head_w_opt, head_b_opt;
    if (model.head) {
        head_w_opt.emplace(model.head->weights.size(), adam);
        head_b_opt.emplace(model.head->biases.size(), adam);
    }

    std::vector<LayerCache> enc_caches(model.encoder.size());
    std::vector<LayerCache> dec_caches(model.decoder.size());
    std::vector<LayerGrads> enc_grads(model.encoder.size());
    std::vector<LayerGrads> dec_grads(model.decoder.size());

    Rng shuffle_rng(derive_seed(tc.seed, "epoch-shuffle"));
    const std::size_t n = x_train.rows();
    TrainHistory history;

    auto evaluate = [&](const Matrix& x, const TargetView& tv) {
        Matrix latent = forward_stack(model.encoder, x, nullptr);
        Matrix recon = forward_stack(model.decoder, latent, nullptr);
        double loss = mae_loss(recon, x).value;
        if (multitask && lambda != 0.0) {
            LayerCache head_cache;
            layer_forward(*model.head, latent, &head_cache);
            if (classify) {
                loss += lambda * softmax_crossentropy(head_cache.preact, tv.labels).value;
            } else {
                Matrix target(x.rows(), 1);
                target.values() = tv.regression;
                loss += lambda * mae_loss(head_cache.preact, target).value;
            }
        }
        return loss;
    };

    for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffle_rng.permutation(n);
        EpochLoss sums;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += tc.batch_size, ++batches) {
            const std::size_t end = std::min(start + tc.batch_size, n);
            const std::vector<std::size_t> batch_idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                     order.begin() + static_cast<std::ptrdiff_t>(end));
            const Matrix xb = x_train.select_rows(batch_idx);

            const Matrix latent = forward_stack(model.encoder, xb, &enc_caches);
            const Matrix recon = forward_stack(model.decoder, latent, &dec_caches);
            LossResult rec_loss = mae_loss(recon, xb);

            double task_value = 0.0;
            LayerGrads head_grads;
            LayerCache head_cache;
            if (multitask) {
                layer_forward(*model.head, latent, &head_cache);
                LossResult task_loss;
                if (classify) {
                    std::vector<int> yb(batch_idx.size());
                    for (std::size_t i = 0; i < batch_idx.size(); ++i)
                        yb[i] = targets.labels[batch_idx[i]];
                    task_loss = softmax_crossentropy(head_cache.preact, yb);
                } else {
                    Matrix yb(batch_idx.size(), 1);
                    for (std::size_t i = 0; i < batch_idx.size(); ++i)
                        yb(i, 0) = targets.regression[batch_idx[i]];
                    task_loss = mae_loss(head_cache.preact, yb);
                }
                task_value = task_loss.value;
                if (lambda != 0.0) {
                    for (double& g : task_loss.grad.values()) g *= lambda;
                    head_grads = affine_backward(*model.head, head_cache, task_loss.grad);
                } else {
                    // Zero gradients keep the head parameters in place while
                    // leaving the encoder stream untouched.
                    head_grads.weight_grad = Matrix(model.head->weights.rows(), model.head->weights.cols());
                    head_grads.bias_grad.assign(model.head->biases.size(), 0.0);
                }
            }

            const double batch_loss = rec_loss.value + lambda * task_value;
            if (!std::isfinite(batch_loss))
                throw lse::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                         ", batch " + std::to_string(batches + 1));
            sums.total += batch_loss;
            sums.recon += rec_loss.value;
            sums.task += task_value;

            Matrix latent_grad = backward_stack(model.decoder, dec_caches, std::move(rec_loss.grad), dec_grads);
            if (multitask && lambda != 0.0) {
                auto& lg = latent_grad.values();
                const auto& hg = head_grads.input_grad.values();
                for (std::size_t i = 0; i < lg.size(); ++i) lg[i] += hg[i];
            }
            backward_stack(model.encoder, enc_caches, std::move(latent_grad), enc_grads);

            enc_opt.apply(model.encoder, enc_grads);
            dec_opt.apply(model.decoder, dec_grads);
            if (multitask) {
                head_w_opt->update(model.head->weights.values(), head_grads.weight_grad.values());
                head_b_opt->update(model.head->biases, head_grads.bias_grad);
            }
        }

        const double denom = static_cast<double>(batches);
        history.train_loss.push_back(sums.total / denom);
        if (multitask) {
            history.train_recon_loss.push_back(sums.recon / denom);
            history.train_task_loss.push_back(sums.task / denom);
        }
        if (x_val.rows() > 0) history.val_loss.push_back(evaluate(x_val, val_targets));
    }
    return history;
}

}  // namespace

TrainHistory train_autoencoder(AutoencoderModel& model, const Matrix& x_train, const Matrix& x_val,
                               const TrainConfig& tc) {
    return train_impl(model, x_train, nullptr, x_val, nullptr, tc);
}

TrainHistory train_autoencoder_multitask(AutoencoderModel& model, const Matrix& x_train,
                                         const std::vector<double>& y_train, const Matrix& x_val,
                                         const std::vector<double>& y_val, const TrainConfig& tc) {
    if (!model.config.multitask)
        throw usage_error("train_multitask: model has no multitask configuration");
    return train_impl(model, x_train, &y_train, x_val, &y_val, tc);
}

Matrix encode(const AutoencoderModel& model, const Matrix& x) {
    if (x.cols() != model.input_dim())
        throw usage_error("encode: input has " + std::to_string(x.cols()) +
                          " columns, model expects " + std::to_string(model.input_dim()));
    return forward_stack(model.encoder, x, nullptr);
}

EmbeddingTable encode_table(const AutoencoderModel& model, const Matrix& x,
                            const std::vector<std::string>& ids, const std::string& source_tag) {
    if (ids.size() != x.rows())
        throw usage_error("encode_table: " + std::to_string(ids.size()) + " ids for " +
                          std::to_string(x.rows()) + " rows");
    EmbeddingTable table;
    table.ids = ids;
    table.vectors = encode(model, x);
    table.source_tag = source_tag;
    return table;
}

Matrix reconstruct(const AutoencoderModel& model, const Matrix& x) {
    if (x.cols() != model.input_dim())
        throw usage_error("reconstruct: input has " + std::to_string(x.cols()) +
                          " columns, model expects " + std::to_string(model.input_dim()));
    return forward_stack(model.decoder, forward_stack(model.encoder, x, nullptr), nullptr);
}

Matrix head_output(const AutoencoderModel& model, const Matrix& x) {
    if (!model.head) throw usage_error("head_output: model has no task head");
    return layer_forward(*model.head, encode(model, x));
}

}  // namespace lse
