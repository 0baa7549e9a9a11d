#include "lse/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "lse/csv.hpp"
#include "lse/embedding_file.hpp"
#include "lse/error.hpp"
#include "lse/metrics.hpp"
#include "lse/rng.hpp"
#include "lse/scenario.hpp"

namespace lse {

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lse::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

void write_scaler_json(const ScalerParams& scaler, const std::vector<std::string>& names,
                       const std::filesystem::path& path) {
    nlohmann::json doc{{"feature_names", names}, {"min", scaler.mins}, {"max", scaler.maxs}};
    write_text_file(path, doc.dump(2) + "\n");
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lse::runtime_error("cannot write '" + path.string() + "'");
    const bool multitask = !history.train_recon_loss.empty();
    const bool has_val = !history.val_loss.empty();
    out << "epoch,train_loss";
    if (multitask) out << ",train_recon_loss,train_task_loss";
    if (has_val) out << ",val_loss";
    out << "\n";
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
        out << (e + 1) << ',' << num(history.train_loss[e]);
        if (multitask) out << ',' << num(history.train_recon_loss[e]) << ',' << num(history.train_task_loss[e]);
        if (has_val) out << ',' << num(history.val_loss[e]);
        out << "\n";
    }
}

struct SplitViews {
    std::vector<std::size_t> train, val, test;

    const std::vector<std::size_t>& of(const std::string& split) const {
        if (split == "train") return train;
        if (split == "validation") return val;
        return test;
    }
};

constexpr const char* kSplitNames[3] = {"train", "validation", "test"};

// Downstream learner on prepared feature matrices; fills metric rows.
void run_downstream(const ExperimentManifest& m, const Matrix features[3],
                    const std::vector<double> targets[3], MetricsTable& table,
                    const std::filesystem::path& run_dir) {
    LearnerSpec spec;
    if (m.search) {
        SearchSpace space = *m.search;
        space.seed = derive_seed(m.seed, "search");
        const Metric metric = m.task == Task::regression ? Metric::r2 : Metric::accuracy;
        const LearnerKind kind = m.task == Task::regression ? LearnerKind::ridge : LearnerKind::logistic;
        const CvResult cv = random_search_cv(features[0], targets[0], m.task, kind, space, metric,
                                             derive_seed(m.seed, "learner"));
        write_cv_table_csv(cv, run_dir / "cv_table.csv");
        spec = cv.best;
    } else if (m.learner) {
        spec = *m.learner;
        spec.seed = derive_seed(m.seed, "learner");
    } else {
        // Default: plain learner with spec defaults for the task.
        spec.kind = m.task == Task::regression ? LearnerKind::ridge : LearnerKind::logistic;
        spec.l2 = m.task == Task::regression ? 1e-6 : 1e-4;
        spec.seed = derive_seed(m.seed, "learner");
    }

    if (m.task == Task::regression) {
        const FittedModel model = fit_ridge(features[0], targets[0], spec.l2);
        for (int s = 0; s < 3; ++s) {
            const std::vector<double> pred = predict_regression(model, features[s]);
            table.add(kSplitNames[s], "r2", r2(targets[s], pred));
            table.add(kSplitNames[s], "mape", mape(targets[s], pred));
        }
        return;
    }

    int max_label = 0;
    std::vector<int> labels[3];
    for (int s = 0; s < 3; ++s) {
        labels[s].resize(targets[s].size());
        for (std::size_t i = 0; i < targets[s].size(); ++i) {
            labels[s][i] = static_cast<int>(targets[s][i]);
            max_label = std::max(max_label, labels[s][i]);
        }
    }
    const std::size_t k = static_cast<std::size_t>(max_label) + 1;
    const FittedModel model = fit_logistic(features[0], labels[0], spec);
    for (int s = 0; s < 3; ++s) {
        const ClassPrediction pred = predict_classification(model, features[s]);
        const ClassificationMetrics cm = classification_metrics(labels[s], pred.labels, k);
        table.add(kSplitNames[s], "accuracy", cm.accuracy);
        table.add(kSplitNames[s], "precision", cm.precision);
        table.add(kSplitNames[s], "recall", cm.recall);
    }
}

struct AePipelineResult {
    // Per-split embeddings plus reconstruction diagnostics on scaled data.
    EmbeddingTable tables[3];
    ReconstructionReport recon[3];
};

// Shared-autoencoder pipeline over one feature block: scale on train rows,
// train the (optionally multitask) autoencoder on the training split, then
// encode and reconstruct every split with the frozen model.
AePipelineResult ae_pipeline(const ExperimentManifest& m, const Dataset& ds, const SplitViews& split,
                             bool multitask, const std::string& tag,
                             const std::filesystem::path& run_dir, const std::string& suffix) {
    const ScalerParams scaler = fit_scaler(ds.features, split.train);
    const Matrix scaled = transform(ds.features, scaler);

    AutoencoderConfig cfg;
    cfg.input_dim = ds.num_features();
    cfg.latent_dim = m.latent_dim;
    cfg.encoder_hidden = m.encoder_hidden;
    if (multitask) {
        MultitaskConfig mt;
        mt.task = m.task;
        mt.lambda = m.multitask_lambda;
        if (m.task == Task::classification) {
            int max_label = 0;
            for (double v : ds.target) max_label = std::max(max_label, static_cast<int>(v));
            mt.head_classes = static_cast<std::size_t>(max_label) + 1;
        }
        cfg.multitask = mt;
    }

    Rng init_rng(derive_seed(m.seed, "ae-init" + suffix));
    AutoencoderModel model = build_autoencoder(cfg, init_rng);

    TrainConfig tc;
    tc.epochs = m.ae_epochs;
    tc.batch_size = m.ae_batch_size;
    tc.learning_rate = m.ae_learning_rate;
    tc.seed = derive_seed(m.seed, "ae-train" + suffix);

    const Matrix x_train = scaled.select_rows(split.train);
    const Matrix x_val = scaled.select_rows(split.val);

    TrainHistory history;
    if (multitask) {
        std::vector<double> y_train, y_val;
        for (std::size_t idx : split.train) y_train.push_back(ds.target[idx]);
        for (std::size_t idx : split.val) y_val.push_back(ds.target[idx]);
        history = train_autoencoder_multitask(model, x_train, y_train, x_val, y_val, tc);
    } else {
        history = train_autoencoder(model, x_train, x_val, tc);
    }

    write_history_csv(history, run_dir / ("history" + suffix + ".csv"));
    write_scaler_json(scaler, ds.feature_names, run_dir / ("scaler" + suffix + ".json"));
    save_checkpoint({model, scaler, ds.feature_names}, run_dir / ("model" + suffix + ".ckpt"));

    AePipelineResult result;
    for (int s = 0; s < 3; ++s) {
        const auto& idx = split.of(kSplitNames[s]);
        const Matrix x = scaled.select_rows(idx);
        std::vector<std::string> ids;
        ids.reserve(idx.size());
        for (std::size_t i : idx) ids.push_back(ds.ids[i]);
        result.tables[s] = encode_table(model, x, ids, tag);
        result.recon[s] = reconstruction_report(x, reconstruct(model, x));
        write_embedding_file(result.tables[s],
                             run_dir / (std::string(kSplitNames[s]) + suffix + ".lse"));
    }
    return result;
}

}  // namespace

RunResult run_scenario(const ExperimentManifest& m) {
    m.validate();
    if (!std::filesystem::exists(m.dataset_path))
        throw data_error("scenario: dataset '" + m.dataset_path.string() + "' does not exist");
    if (m.threads > 0) set_num_threads(m.threads);

    RunResult result;
    result.table.dataset = m.name;
    result.table.task = task_name(m.task);
    result.table.scenario = m.scenario;
    result.table.seed = m.seed;
    result.table.config_digest = m.config_digest();
    result.table.started_at = utc_now();

    result.run_dir = m.output_dir / (m.name + "-s" + std::to_string(m.scenario) + "-" + m.config_digest());
    std::filesystem::create_directories(result.run_dir);
    write_text_file(result.run_dir / "manifest.json", m.canonical_json() + "\n");

    Dataset ds = load_csv(m.dataset_path, m.id_column, m.target_column, m.task);
    if (!ds.has_target()) throw data_error("scenario: dataset has no target column");

    if (m.subsample_rows && *m.subsample_rows < ds.num_rows()) {
        // Seeded uniform subsample, kept in the dataset's original order.
        Rng rng(derive_seed(m.seed, "subsample"));
        std::vector<std::size_t> order = rng.permutation(ds.num_rows());
        order.resize(*m.subsample_rows);
        std::sort(order.begin(), order.end());
        ds = ds.select_rows(order);
    }

    const RowSplit row_parts = row_split(ds.num_rows(), m.split, derive_seed(m.seed, "row-split"));
    const SplitViews split{row_parts.train_idx, row_parts.val_idx, row_parts.test_idx};

    std::vector<double> targets[3];
    for (int s = 0; s < 3; ++s) {
        const auto& idx = split.of(kSplitNames[s]);
        targets[s].reserve(idx.size());
        for (std::size_t i : idx) targets[s].push_back(ds.target[i]);
    }

    Matrix features[3];
    switch (m.scenario) {
        case 0: {
            const ScalerParams scaler = fit_scaler(ds.features, split.train);
            write_scaler_json(scaler, ds.feature_names, result.run_dir / "scaler.json");
            const Matrix scaled = transform(ds.features, scaler);
            for (int s = 0; s < 3; ++s) features[s] = scaled.select_rows(split.of(kSplitNames[s]));
            break;
        }
        case 1:
        case 3: {
            const AePipelineResult ae =
                ae_pipeline(m, ds, split, m.scenario == 3, "shared", result.run_dir, "");
            for (int s = 0; s < 3; ++s) {
                features[s] = ae.tables[s].vectors;
                result.table.add(kSplitNames[s], "representation_error", ae.recon[s].representation_error);
                result.table.add(kSplitNames[s], "correct_rate", ae.recon[s].correct_rate);
            }
            break;
        }
        case 2:
        case 4: {
            const VerticalSplitResult peers =
                vertical_split(ds, *m.vertical, derive_seed(m.seed, "vertical-split"));
            const bool multitask = m.scenario == 4;
            const AePipelineResult ae_a =
                ae_pipeline(m, peers.peer_a, split, multitask, "peer_a", result.run_dir, "_a");
            const AePipelineResult ae_b =
                ae_pipeline(m, peers.peer_b, split, multitask, "peer_b", result.run_dir, "_b");
            for (int s = 0; s < 3; ++s) {
                const JoinedEmbeddings joined =
                    join_embeddings(ae_a.tables[s], ae_b.tables[s], JoinMode::strict);
                features[s] = joined.features;
                // Reconstruction metrics averaged over the two peers.
                result.table.add(kSplitNames[s], "representation_error",
                                 0.5 * (ae_a.recon[s].representation_error +
                                        ae_b.recon[s].representation_error));
                result.table.add(kSplitNames[s], "correct_rate",
                                 0.5 * (ae_a.recon[s].correct_rate + ae_b.recon[s].correct_rate));
            }
            break;
        }
        default:
            throw usage_error("scenario: unknown scenario " + std::to_string(m.scenario));
    }

    try {
        run_downstream(m, features, targets, result.table, result.run_dir);
    } catch (const Error& e) {
        throw Error(e.kind(), "scenario " + std::to_string(m.scenario) + " (" + m.name +
                                  "): " + e.what());
    }

    result.table.finished_at = utc_now();
    write_text_file(result.run_dir / "report.txt", emit_report({result.table}, ReportFormat::text));
    write_text_file(result.run_dir / "report.csv", emit_report({result.table}, ReportFormat::csv));
    write_text_file(result.run_dir / "report.json", emit_report({result.table}, ReportFormat::json));
    return result;
}

}  // namespace lse
