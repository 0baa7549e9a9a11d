#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lse/autoencoder.hpp"
#include "lse/dataset.hpp"
#include "lse/downstream.hpp"
#include "lse/split.hpp"

namespace lse {

// Declarative description of one scenario run. Parsed from a JSON document;
// every random decision downstream flows from the single master seed.
struct ExperimentManifest {
    std::string name;  // run label; defaults to the dataset file stem
    int scenario = 0;  // 0..4
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "runs";

    std::filesystem::path dataset_path;
    std::string id_column = "id";
    std::string target_column;
    Task task = Task::regression;

    std::optional<std::size_t> subsample_rows;

    SplitFractions split;

    std::optional<VerticalSpec> vertical;  // required for scenarios 2 and 4

    // Autoencoder block (scenarios 1-4).
    std::size_t latent_dim = 32;
    std::vector<std::size_t> encoder_hidden = {128, 64, 40};
    double multitask_lambda = 1.0;  // scenarios 3-4
    std::size_t ae_epochs = 200;
    std::size_t ae_batch_size = 128;
    double ae_learning_rate = 0.0001;

    // Downstream learner: a fixed spec, or a randomized search over a space.
    std::optional<LearnerSpec> learner;
    std::optional<SearchSpace> search;

    int threads = 0;  // 0 = leave the global setting alone

    // Canonical JSON (sorted keys); digests and run directories derive from it.
    std::string canonical_json() const;
    std::string config_digest() const;  // 16 hex chars

    // Structural checks that do not touch the filesystem.
    void validate() const;
};

ExperimentManifest parse_manifest(const std::string& json_text);
ExperimentManifest load_manifest(const std::filesystem::path& path);

}  // namespace lse
