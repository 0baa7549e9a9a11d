#include "lse/lse_c.h"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <string>

#include "lse/autoencoder.hpp"
#include "lse/binary_io.hpp"
#include "lse/csv.hpp"
#include "lse/downstream.hpp"
#include "lse/embedding_file.hpp"
#include "lse/error.hpp"
#include "lse/gradcheck.hpp"
#include "lse/manifest.hpp"
#include "lse/metrics.hpp"
#include "lse/scenario.hpp"
#include "lse/split.hpp"
#include "lse/wire.hpp"

using nlohmann::json;

/* Handle definitions: thin owning wrappers over the C++ values. */
struct lse_dataset {
    lse::Dataset value;
};
struct lse_model {
    lse::Checkpoint value;
};
struct lse_table {
    lse::EmbeddingTable value;
};

namespace {

thread_local std::string g_last_error;

lse_status status_of(const lse::Error& e) { return static_cast<lse_status>(static_cast<int>(e.kind())); }

template <typename Fn>
lse_status guarded(Fn&& fn) {
    try {
        fn();
        return LSE_OK;
    } catch (const lse::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LSE_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return LSE_ERR_RUNTIME;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool ok, const char* message) {
    if (!ok) throw lse::usage_error(message);
}

json parse_options(const char* options_json) {
    if (!options_json || !*options_json) return json::object();
    try {
        json doc = json::parse(options_json);
        if (!doc.is_object()) throw lse::usage_error("options: JSON object expected");
        return doc;
    } catch (const json::exception& e) {
        throw lse::usage_error(std::string("options: invalid JSON: ") + e.what());
    }
}

}  // namespace

extern "C" {

const char* lse_version(void) { return "0.1.0"; }

const char* lse_last_error(void) { return g_last_error.c_str(); }

void lse_string_free(char* s) { std::free(s); }

void lse_set_num_threads(int n) { lse::set_num_threads(n); }

/* ---- datasets ---------------------------------------------------------- */

lse_status lse_dataset_load_csv(const char* path, const char* id_column, const char* target_column,
                                const char* task, lse_dataset** out) {
    return guarded([&] {
        require(path && id_column && out, "lse_dataset_load_csv: path, id_column and out are required");
        std::optional<std::string> target;
        if (target_column) target = target_column;
        std::optional<lse::Task> task_value;
        if (task) task_value = lse::task_from_string(task);
        auto handle = std::make_unique<lse_dataset>();
        handle->value = lse::load_csv(path, id_column, target, task_value);
        *out = handle.release();
    });
}

lse_status lse_dataset_save_csv(const lse_dataset* ds, const char* path, const char* id_column,
                                const char* target_column) {
    return guarded([&] {
        require(ds && path, "lse_dataset_save_csv: ds and path are required");
        lse::save_csv(ds->value, path, id_column ? id_column : "id",
                      target_column ? target_column : "target");
    });
}

lse_status lse_dataset_rows(const lse_dataset* ds, uint64_t* out) {
    return guarded([&] {
        require(ds && out, "lse_dataset_rows: ds and out are required");
        *out = ds->value.num_rows();
    });
}

lse_status lse_dataset_features(const lse_dataset* ds, uint64_t* out) {
    return guarded([&] {
        require(ds && out, "lse_dataset_features: ds and out are required");
        *out = ds->value.num_features();
    });
}

void lse_dataset_free(lse_dataset* ds) { delete ds; }

lse_status lse_vertical_split_fraction(const lse_dataset* ds, double fraction, uint64_t seed,
                                       lse_dataset** out_a, lse_dataset** out_b) {
    return guarded([&] {
        require(ds && out_a && out_b, "lse_vertical_split_fraction: ds and outputs are required");
        lse::VerticalSpec spec;
        spec.fraction = fraction;
        auto split = lse::vertical_split(ds->value, spec, seed);
        auto a = std::make_unique<lse_dataset>();
        auto b = std::make_unique<lse_dataset>();
        a->value = std::move(split.peer_a);
        b->value = std::move(split.peer_b);
        *out_a = a.release();
        *out_b = b.release();
    });
}

lse_status lse_vertical_split_columns(const lse_dataset* ds, const char* const* peer_a_columns,
                                      size_t peer_a_count, const char* const* peer_b_columns,
                                      size_t peer_b_count, lse_dataset** out_a, lse_dataset** out_b) {
    return guarded([&] {
        require(ds && out_a && out_b, "lse_vertical_split_columns: ds and outputs are required");
        require(peer_a_columns || peer_a_count == 0, "lse_vertical_split_columns: null peer_a list");
        require(peer_b_columns || peer_b_count == 0, "lse_vertical_split_columns: null peer_b list");
        lse::VerticalSpec spec;
        for (size_t i = 0; i < peer_a_count; ++i) spec.peer_a_columns.emplace_back(peer_a_columns[i]);
        for (size_t i = 0; i < peer_b_count; ++i) spec.peer_b_columns.emplace_back(peer_b_columns[i]);
        auto split = lse::vertical_split(ds->value, spec, 0);
        auto a = std::make_unique<lse_dataset>();
        auto b = std::make_unique<lse_dataset>();
        a->value = std::move(split.peer_a);
        b->value = std::move(split.peer_b);
        *out_a = a.release();
        *out_b = b.release();
    });
}

/* ---- autoencoder ------------------------------------------------------- */

lse_status lse_train_autoencoder(const lse_dataset* ds, const char* options_json, lse_model** out) {
    return guarded([&] {
        require(ds && out, "lse_train_autoencoder: ds and out are required");
        const json opts = parse_options(options_json);

        lse::AutoencoderConfig cfg;
        cfg.input_dim = ds->value.num_features();
        cfg.latent_dim = opts.value("latent_dim", std::size_t{32});
        if (opts.contains("encoder_hidden"))
            cfg.encoder_hidden = opts["encoder_hidden"].get<std::vector<std::size_t>>();

        const std::uint64_t seed = opts.value("seed", std::uint64_t{0});
        if (opts.contains("multitask")) {
            require(ds->value.has_target() && ds->value.task.has_value(),
                    "lse_train_autoencoder: multitask needs a dataset with a target and task");
            lse::MultitaskConfig mt;
            mt.task = *ds->value.task;
            mt.lambda = opts["multitask"].value("lambda", 1.0);
            if (mt.task == lse::Task::classification) {
                int max_label = 0;
                for (int l : ds->value.class_labels()) max_label = std::max(max_label, l);
                mt.head_classes = static_cast<std::size_t>(max_label) + 1;
            }
            cfg.multitask = mt;
        }

        lse::TrainConfig tc;
        tc.epochs = opts.value("epochs", std::size_t{200});
        tc.batch_size = opts.value("batch_size", std::size_t{128});
        tc.learning_rate = opts.value("learning_rate", 0.0001);
        tc.seed = lse::derive_seed(seed, "ae-train");

        // Scaler fitted on every provided row; pass only training rows when
        // leakage matters.
        std::vector<std::size_t> all_rows(ds->value.num_rows());
        for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
        const lse::ScalerParams scaler = lse::fit_scaler(ds->value.features, all_rows);
        const lse::Matrix scaled = lse::transform(ds->value.features, scaler);

        // Optional seeded monitoring holdout.
        const double val_fraction = opts.value("val_fraction", 0.0);
        require(val_fraction >= 0.0 && val_fraction < 1.0,
                "lse_train_autoencoder: val_fraction must be in [0, 1)");
        lse::Matrix x_train = scaled;
        lse::Matrix x_val;
        std::vector<double> y_train = ds->value.target, y_val;
        if (val_fraction > 0.0) {
            lse::Rng rng(lse::derive_seed(seed, "val-holdout"));
            std::vector<std::size_t> order = rng.permutation(scaled.rows());
            const auto n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(scaled.rows()));
            std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
            std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
            x_train = scaled.select_rows(train_idx);
            x_val = scaled.select_rows(val_idx);
            if (cfg.multitask) {
                y_train.clear();
                y_val.clear();
                for (std::size_t i : train_idx) y_train.push_back(ds->value.target[i]);
                for (std::size_t i : val_idx) y_val.push_back(ds->value.target[i]);
            }
        }

        lse::Rng init_rng(lse::derive_seed(seed, "ae-init"));
        auto handle = std::make_unique<lse_model>();
        handle->value.model = lse::build_autoencoder(cfg, init_rng);
        handle->value.scaler = scaler;
        handle->value.feature_names = ds->value.feature_names;
        if (cfg.multitask)
            lse::train_autoencoder_multitask(handle->value.model, x_train, y_train, x_val, y_val, tc);
        else
            lse::train_autoencoder(handle->value.model, x_train, x_val, tc);
        *out = handle.release();
    });
}

lse_status lse_model_save(const lse_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "lse_model_save: model and path are required");
        lse::save_checkpoint(model->value, path);
    });
}

lse_status lse_model_load(const char* path, lse_model** out) {
    return guarded([&] {
        require(path && out, "lse_model_load: path and out are required");
        auto handle = std::make_unique<lse_model>();
        handle->value = lse::load_checkpoint(path);
        *out = handle.release();
    });
}

lse_status lse_model_latent_dim(const lse_model* model, uint64_t* out) {
    return guarded([&] {
        require(model && out, "lse_model_latent_dim: model and out are required");
        *out = model->value.model.latent_dim();
    });
}

void lse_model_free(lse_model* model) { delete model; }

lse_status lse_model_encode(const lse_model* model, const lse_dataset* ds, const char* source_tag,
                            lse_table** out) {
    return guarded([&] {
        require(model && ds && out, "lse_model_encode: model, ds and out are required");
        if (!model->value.feature_names.empty() &&
            model->value.feature_names != ds->value.feature_names)
            throw lse::data_error(
                "lse_model_encode: dataset feature columns do not match the checkpoint's");
        lse::Matrix x = ds->value.features;
        if (model->value.scaler) x = lse::transform(x, *model->value.scaler);
        auto handle = std::make_unique<lse_table>();
        handle->value = lse::encode_table(model->value.model, x, ds->value.ids,
                                          source_tag ? source_tag : "");
        *out = handle.release();
    });
}

/* ---- embedding tables -------------------------------------------------- */

lse_status lse_table_write(const lse_table* table, const char* path) {
    return guarded([&] {
        require(table && path, "lse_table_write: table and path are required");
        lse::write_embedding_file(table->value, path);
    });
}

lse_status lse_table_read(const char* path, lse_table** out) {
    return guarded([&] {
        require(path && out, "lse_table_read: path and out are required");
        auto handle = std::make_unique<lse_table>();
        handle->value = lse::read_embedding_file(path);
        *out = handle.release();
    });
}

lse_status lse_table_write_csv(const lse_table* table, const char* path) {
    return guarded([&] {
        require(table && path, "lse_table_write_csv: table and path are required");
        lse::write_embedding_csv(table->value, path);
    });
}

lse_status lse_table_rows(const lse_table* table, uint64_t* out) {
    return guarded([&] {
        require(table && out, "lse_table_rows: table and out are required");
        *out = table->value.num_rows();
    });
}

lse_status lse_table_dim(const lse_table* table, uint64_t* out) {
    return guarded([&] {
        require(table && out, "lse_table_dim: table and out are required");
        *out = table->value.latent_dim();
    });
}

void lse_table_free(lse_table* table) { delete table; }

lse_status lse_join_tables_csv(const char* path_a, const char* path_b, const char* mode,
                               const char* out_csv_path) {
    return guarded([&] {
        require(path_a && path_b && out_csv_path, "lse_join_tables_csv: paths are required");
        const std::string mode_str = mode ? mode : "strict";
        lse::JoinMode join_mode;
        if (mode_str == "strict") join_mode = lse::JoinMode::strict;
        else if (mode_str == "inner") join_mode = lse::JoinMode::inner;
        else throw lse::usage_error("lse_join_tables_csv: mode must be 'strict' or 'inner'");

        const lse::EmbeddingTable a = lse::read_embedding_file(path_a);
        const lse::EmbeddingTable b = lse::read_embedding_file(path_b);
        const lse::JoinedEmbeddings joined = lse::join_embeddings(a, b, join_mode);

        std::string tag_a = a.source_tag.empty() ? "a" : a.source_tag;
        std::string tag_b = b.source_tag.empty() ? "b" : b.source_tag;
        if (tag_a == tag_b) {
            tag_a += "_a";
            tag_b += "_b";
        }
        lse::Dataset out;
        out.ids = joined.ids;
        out.features = joined.features;
        for (std::size_t c = 0; c < a.latent_dim(); ++c)
            out.feature_names.push_back(tag_a + "_m" + std::to_string(c));
        for (std::size_t c = 0; c < b.latent_dim(); ++c)
            out.feature_names.push_back(tag_b + "_m" + std::to_string(c));
        lse::save_csv(out, out_csv_path);
    });
}

/* ---- exchange ---------------------------------------------------------- */

lse_status lse_exchange_serve(const char* bind_host, uint16_t port, const char* output_dir,
                              int timeout_seconds, char** out_file_path) {
    return guarded([&] {
        require(output_dir, "lse_exchange_serve: output_dir is required");
        lse::ServeOptions options;
        if (bind_host) options.bind_host = bind_host;
        options.port = port;
        options.output_dir = output_dir;
        if (timeout_seconds > 0) options.timeout_seconds = timeout_seconds;
        const lse::ServeResult result = lse::serve(options);
        if (out_file_path) *out_file_path = dup_string(result.file_path.string());
    });
}

lse_status lse_exchange_send(const char* host, uint16_t port, const char* path, int timeout_seconds,
                             uint64_t* out_bytes_sent) {
    return guarded([&] {
        require(host && path, "lse_exchange_send: host and path are required");
        const lse::SendSummary summary =
            lse::send_embedding_file(host, port, path, timeout_seconds > 0 ? timeout_seconds : 30);
        if (out_bytes_sent) *out_bytes_sent = summary.bytes_sent;
    });
}

/* ---- downstream learners ----------------------------------------------- */

lse_status lse_train_downstream(const char* train_csv, const char* eval_csv, const char* id_column,
                                const char* target_column, const char* task,
                                const char* options_json, char** out_metrics_json) {
    return guarded([&] {
        require(train_csv && id_column && target_column && task,
                "lse_train_downstream: train_csv, id_column, target_column and task are required");
        const lse::Task task_value = lse::task_from_string(task);
        const json opts = parse_options(options_json);

        const lse::Dataset train =
            lse::load_csv(train_csv, id_column, std::string(target_column), task_value);
        std::optional<lse::Dataset> eval;
        if (eval_csv) {
            eval = lse::load_csv(eval_csv, id_column, std::string(target_column), task_value);
            if (eval->feature_names != train.feature_names)
                throw lse::data_error("lse_train_downstream: eval columns do not match train columns");
        }

        lse::LearnerSpec spec;
        spec.kind = task_value == lse::Task::regression ? lse::LearnerKind::ridge
                                                        : lse::LearnerKind::logistic;
        json result;
        if (opts.contains("search")) {
            lse::SearchSpace space = lse::default_search_space(spec.kind);
            space.n_samples = opts["search"].value("n_samples", std::size_t{20});
            space.n_folds = opts["search"].value("n_folds", std::size_t{3});
            space.seed = opts["search"].value("seed", std::uint64_t{0});
            const lse::Metric metric =
                task_value == lse::Task::regression ? lse::Metric::r2 : lse::Metric::accuracy;
            const lse::CvResult cv = lse::random_search_cv(train.features, train.target, task_value,
                                                           spec.kind, space, metric, space.seed);
            spec = cv.best;
            result["search"] = {{"candidates", cv.table.size()},
                                {"best_index", cv.best_index},
                                {"best_l2", cv.best.l2},
                                {"best_learning_rate", cv.best.learning_rate},
                                {"best_epochs", cv.best.epochs}};
        } else {
            if (opts.contains("kind")) spec.kind = lse::learner_kind_from_string(opts["kind"]);
            spec.l2 = opts.value("l2", 0.0);
            spec.learning_rate = opts.value("learning_rate", 0.01);
            spec.epochs = opts.value("epochs", std::size_t{100});
            spec.batch_size = opts.value("batch_size", std::size_t{128});
            spec.seed = opts.value("seed", std::uint64_t{0});
        }

        auto evaluate = [&](const lse::Dataset& ds, const lse::FittedModel& model) {
            json metrics;
            if (task_value == lse::Task::regression) {
                const std::vector<double> pred = lse::predict_regression(model, ds.features);
                metrics["r2"] = lse::r2(ds.target, pred);
                metrics["mape"] = lse::mape(ds.target, pred);
            } else {
                const std::vector<int> truth = ds.class_labels();
                const lse::ClassPrediction pred = lse::predict_classification(model, ds.features);
                int max_label = 0;
                for (int l : truth) max_label = std::max(max_label, l);
                const std::size_t k = std::max(model.num_classes,
                                               static_cast<std::size_t>(max_label) + 1);
                const lse::ClassificationMetrics cm = lse::classification_metrics(truth, pred.labels, k);
                metrics["accuracy"] = cm.accuracy;
                metrics["precision"] = cm.precision;
                metrics["recall"] = cm.recall;
            }
            return metrics;
        };

        lse::FittedModel model;
        if (task_value == lse::Task::regression)
            model = lse::fit_ridge(train.features, train.target, spec.l2);
        else
            model = lse::fit_logistic(train.features, train.class_labels(), spec);

        result["train"] = evaluate(train, model);
        if (eval) result["eval"] = evaluate(*eval, model);
        if (out_metrics_json) *out_metrics_json = dup_string(result.dump(2) + "\n");
    });
}

/* ---- scenarios ---------------------------------------------------------- */

lse_status lse_run_scenario(const char* manifest_path, char** out_run_dir) {
    return guarded([&] {
        require(manifest_path, "lse_run_scenario: manifest_path is required");
        const lse::ExperimentManifest manifest = lse::load_manifest(manifest_path);
        const lse::RunResult result = lse::run_scenario(manifest);
        if (out_run_dir) *out_run_dir = dup_string(result.run_dir.string());
    });
}

lse_status lse_merge_reports(const char* const* report_json_paths, size_t count, const char* format,
                             char** out_document) {
    return guarded([&] {
        require(report_json_paths && count > 0, "lse_merge_reports: need at least one report");
        require(out_document, "lse_merge_reports: out_document is required");
        std::vector<lse::MetricsTable> tables;
        for (size_t i = 0; i < count; ++i) {
            const auto bytes = lse::read_file_bytes(report_json_paths[i]);
            const std::string text(bytes.begin(), bytes.end());
            for (auto& t : lse::parse_report_json(text)) tables.push_back(std::move(t));
        }
        const lse::ReportFormat fmt = lse::report_format_from_string(format ? format : "text");
        *out_document = dup_string(lse::emit_report(tables, fmt));
    });
}

/* ---- verification ------------------------------------------------------ */

lse_status lse_gradcheck(uint64_t networks, uint64_t seed, double* out_max_rel_error) {
    return guarded([&] {
        const lse::GradCheckReport report =
            lse::run_gradient_check_suite(networks ? networks : 50, seed);
        if (out_max_rel_error) *out_max_rel_error = report.max_rel_error;
    });
}

}  // extern "C"
