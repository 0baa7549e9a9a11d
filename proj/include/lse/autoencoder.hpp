#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lse/dataset.hpp"
#include "lse/embedding.hpp"
#include "lse/layer.hpp"
#include "lse/scaler.hpp"

namespace lse {

struct MultitaskConfig {
    Task task = Task::regression;
    std::size_t head_classes = 0;  // required for classification
    double lambda = 1.0;
};

struct AutoencoderConfig {
    std::size_t input_dim = 0;
    std::size_t latent_dim = 32;
    std::vector<std::size_t> encoder_hidden = {128, 64, 40};
    std::optional<MultitaskConfig> multitask;
};

// Fixed dense stack: encoder N -> 128 -> 64 -> 40 -> M, decoder mirrored
// M -> 40 -> 64 -> 128 -> N. Hidden layers are relu; the latent layer and the
// reconstruction output are identity. The optional head maps M -> 1
// (regression, identity) or M -> K (classification, softmax).
struct AutoencoderModel {
    AutoencoderConfig config;
    std::vector<LayerParams> encoder;
    std::vector<LayerParams> decoder;
    std::optional<LayerParams> head;

    std::size_t input_dim() const { return config.input_dim; }
    std::size_t latent_dim() const { return config.latent_dim; }
};

AutoencoderModel build_autoencoder(const AutoencoderConfig& cfg, Rng& rng);

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 128;
    double learning_rate = 0.0001;
    std::uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> train_loss;       // joint loss when multitask
    std::vector<double> val_loss;         // empty when no validation set given
    std::vector<double> train_recon_loss; // multitask only
    std::vector<double> train_task_loss;  // multitask only
};

// Minibatch Adam on MAE(reconstruction, input). Inputs are expected scaled to
// [0, 1]. Aborts with a diagnostic when the loss turns non-finite.
TrainHistory train_autoencoder(AutoencoderModel& model, const Matrix& x_train,
                               const Matrix& x_val, const TrainConfig& tc);

// Joint loss MAE(reconstruction) + lambda * task loss. The task loss is MAE on
// the train-standardized target for regression and softmax cross-entropy for
// classification. With lambda = 0 the encoder/decoder trajectory is bitwise
// identical to plain training under the same seed.
TrainHistory train_autoencoder_multitask(AutoencoderModel& model, const Matrix& x_train,
                                         const std::vector<double>& y_train, const Matrix& x_val,
                                         const std::vector<double>& y_val, const TrainConfig& tc);

// Encoder forward pass only; pure for a fixed model.
Matrix encode(const AutoencoderModel& model, const Matrix& x);
EmbeddingTable encode_table(const AutoencoderModel& model, const Matrix& x,
                            const std::vector<std::string>& ids, const std::string& source_tag);

// decoder(encoder(x)).
Matrix reconstruct(const AutoencoderModel& model, const Matrix& x);

// Task-head output from raw inputs: probabilities (classification) or the
// standardized-scale prediction (regression).
Matrix head_output(const AutoencoderModel& model, const Matrix& x);

// Model checkpoint: binary, versioned, CRC-checked; save -> load -> encode is
// bitwise exact. Bundles the fitted input scaler and feature names so that a
// checkpoint is sufficient to embed raw rows.
struct Checkpoint {
    AutoencoderModel model;
    std::optional<ScalerParams> scaler;
    std::vector<std::string> feature_names;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lse
