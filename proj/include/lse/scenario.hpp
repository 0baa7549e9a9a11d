#pragma once

#include <filesystem>

#include "lse/manifest.hpp"
#include "lse/report.hpp"

namespace lse {

struct RunResult {
    MetricsTable table;
    std::filesystem::path run_dir;
};

// Runs one scenario end to end: load, (optional seeded subsample), row split,
// scenario-specific pipeline, downstream learner, metrics on all three
// splits. Every artifact (manifest copy, scaler, checkpoints, embeddings,
// CV table, history, reports) lands in a content-addressed run directory
// under the manifest's output_dir.
//
// Scalers and autoencoders are fitted on the training split only; embeddings
// for validation/test always come from the frozen model.
RunResult run_scenario(const ExperimentManifest& manifest);

}  // namespace lse
