// lse: command-line front end for the latent-space-embedding collaborative
// learning pipeline. Talks to the shared library exclusively through its C
// API. Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "lse/lse_c.h"

namespace {

int report_status(lse_status status) {
    if (status != LSE_OK) std::fprintf(stderr, "error: %s\n", lse_last_error());
    return static_cast<int>(status);
}

struct StringOut {
    char* value = nullptr;
    ~StringOut() { lse_string_free(value); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-preserving collaborative learning via autoencoder latent-space embeddings"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads for matrix products (default 1)");

    // --- split ---------------------------------------------------------
    auto* split = app.add_subcommand("split", "vertically split a CSV into two peer CSVs");
    std::string split_input, split_id = "id", split_target, split_out_a, split_out_b;
    std::vector<std::string> split_peer_a, split_peer_b;
    double split_fraction = 0.0;
    std::uint64_t split_seed = 0;
    split->add_option("--input", split_input, "input CSV")->required();
    split->add_option("--id-col", split_id, "id column name (default id)");
    split->add_option("--target-col", split_target, "target column kept on both peers");
    split->add_option("--fraction", split_fraction, "fraction of features for peer A");
    split->add_option("--peer-a", split_peer_a, "explicit peer A columns")->delimiter(',');
    split->add_option("--peer-b", split_peer_b, "explicit peer B columns")->delimiter(',');
    split->add_option("--seed", split_seed, "shuffle seed for fraction mode");
    split->add_option("--out-a", split_out_a, "peer A output CSV")->required();
    split->add_option("--out-b", split_out_b, "peer B output CSV")->required();

    // --- train-ae ------------------------------------------------------
    auto* train_ae = app.add_subcommand("train-ae", "train an autoencoder on a CSV");
    std::string ta_input, ta_id = "id", ta_target, ta_task, ta_out;
    std::size_t ta_latent = 32, ta_epochs = 200, ta_batch = 128;
    double ta_lr = 0.0001, ta_val_fraction = 0.0, ta_lambda = 1.0;
    bool ta_multitask = false;
    std::uint64_t ta_seed = 0;
    train_ae->add_option("--input", ta_input, "training CSV (pass training rows only)")->required();
    train_ae->add_option("--id-col", ta_id, "id column name (default id)");
    train_ae->add_option("--target-col", ta_target, "target column (required for --multitask)");
    train_ae->add_option("--task", ta_task, "regression|classification (with --target-col)");
    train_ae->add_option("--latent", ta_latent, "embedding size M (default 32)");
    train_ae->add_option("--epochs", ta_epochs, "training epochs (default 200)");
    train_ae->add_option("--batch", ta_batch, "minibatch size (default 128)");
    train_ae->add_option("--lr", ta_lr, "Adam learning rate (default 0.0001)");
    train_ae->add_option("--val-fraction", ta_val_fraction, "seeded monitoring holdout fraction");
    train_ae->add_flag("--multitask", ta_multitask, "train the non-naive multitask variant");
    train_ae->add_option("--lambda", ta_lambda, "multitask loss weight (default 1.0)");
    train_ae->add_option("--seed", ta_seed, "seed for init and batch order");
    train_ae->add_option("--out", ta_out, "checkpoint output path")->required();

    // --- embed ---------------------------------------------------------
    auto* embed = app.add_subcommand("embed", "encode a CSV with a trained checkpoint");
    std::string em_model, em_input, em_id = "id", em_target, em_out, em_csv, em_tag = "embedding";
    embed->add_option("--model", em_model, "checkpoint path")->required();
    embed->add_option("--input", em_input, "input CSV")->required();
    embed->add_option("--id-col", em_id, "id column name (default id)");
    embed->add_option("--target-col", em_target, "target column to exclude from features");
    embed->add_option("--tag", em_tag, "source tag stored in the embedding file");
    embed->add_option("--out", em_out, "embedding file output (.lse)")->required();
    embed->add_option("--csv", em_csv, "also export the embeddings as CSV");

    // --- exchange ------------------------------------------------------
    auto* exchange = app.add_subcommand("exchange", "transfer embedding files between peers");
    exchange->require_subcommand(1);
    auto* serve = exchange->add_subcommand("serve", "receive one embedding file");
    std::string sv_bind = "0.0.0.0", sv_out_dir = ".";
    std::uint16_t sv_port = 7519;
    int sv_timeout = 30;
    serve->add_option("--bind", sv_bind, "bind address (default 0.0.0.0)");
    serve->add_option("--port", sv_port, "listen port (default 7519)");
    serve->add_option("--out-dir", sv_out_dir, "directory for the received file");
    serve->add_option("--timeout", sv_timeout, "idle timeout in seconds (default 30)");
    auto* send = exchange->add_subcommand("send", "send an embedding file");
    std::string sd_host, sd_file;
    std::uint16_t sd_port = 7519;
    int sd_timeout = 30;
    send->add_option("--host", sd_host, "receiver host")->required();
    send->add_option("--port", sd_port, "receiver port (default 7519)");
    send->add_option("--file", sd_file, "embedding file to send")->required();
    send->add_option("--timeout", sd_timeout, "socket timeout in seconds (default 30)");

    // --- join ----------------------------------------------------------
    auto* join = app.add_subcommand("join", "merge two embedding files by observation id");
    std::string jn_a, jn_b, jn_mode = "strict", jn_out;
    join->add_option("--a", jn_a, "first embedding file")->required();
    join->add_option("--b", jn_b, "second embedding file")->required();
    join->add_option("--mode", jn_mode, "strict|inner (default strict)");
    join->add_option("--out", jn_out, "merged CSV output")->required();

    // --- train-downstream -----------------------------------------------
    auto* downstream = app.add_subcommand("train-downstream", "fit a downstream learner on a CSV");
    std::string td_train, td_eval, td_id = "id", td_target, td_task, td_kind;
    double td_l2 = 0.0, td_lr = 0.01;
    std::size_t td_epochs = 100, td_batch = 128, td_search_samples = 0, td_search_folds = 3;
    std::uint64_t td_seed = 0;
    downstream->add_option("--train", td_train, "training CSV")->required();
    downstream->add_option("--eval", td_eval, "held-out CSV to evaluate");
    downstream->add_option("--id-col", td_id, "id column name (default id)");
    downstream->add_option("--target-col", td_target, "target column")->required();
    downstream->add_option("--task", td_task, "regression|classification")->required();
    downstream->add_option("--learner", td_kind, "ridge|logistic (default by task)");
    downstream->add_option("--l2", td_l2, "l2 strength");
    downstream->add_option("--lr", td_lr, "logistic learning rate");
    downstream->add_option("--epochs", td_epochs, "logistic epochs");
    downstream->add_option("--batch", td_batch, "logistic minibatch size");
    downstream->add_option("--search", td_search_samples, "randomized-search candidates (0 = off)");
    downstream->add_option("--folds", td_search_folds, "CV folds for --search (default 3)");
    downstream->add_option("--seed", td_seed, "seed for training and search");

    // --- run-scenario ----------------------------------------------------
    auto* run = app.add_subcommand("run-scenario", "run a scenario described by a manifest");
    std::string rs_manifest;
    run->add_option("--manifest", rs_manifest, "manifest JSON path")->required();

    // --- report ----------------------------------------------------------
    auto* report = app.add_subcommand("report", "merge run reports into one table");
    std::vector<std::string> rp_inputs;
    std::string rp_format = "text", rp_out;
    report->add_option("--inputs", rp_inputs, "report.json files")->required()->delimiter(',');
    report->add_option("--format", rp_format, "text|csv|json (default text)");
    report->add_option("--out", rp_out, "write to file instead of stdout");

    // --- gradcheck --------------------------------------------------------
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the numeric core");
    std::uint64_t gc_networks = 50, gc_seed = 20240 /* arbitrary fixed default */;
    gradcheck->add_option("--networks", gc_networks, "number of random networks (default 50)");
    gradcheck->add_option("--seed", gc_seed, "suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (threads > 0) lse_set_num_threads(threads);

    if (*split) {
        lse_dataset* ds = nullptr;
        lse_status status = lse_dataset_load_csv(split_input.c_str(), split_id.c_str(),
                                                 split_target.empty() ? nullptr : split_target.c_str(),
                                                 nullptr, &ds);
        if (status != LSE_OK) return report_status(status);
        lse_dataset* a = nullptr;
        lse_dataset* b = nullptr;
        if (!split_peer_a.empty() || !split_peer_b.empty()) {
            std::vector<const char*> pa, pb;
            for (const auto& s : split_peer_a) pa.push_back(s.c_str());
            for (const auto& s : split_peer_b) pb.push_back(s.c_str());
            status = lse_vertical_split_columns(ds, pa.data(), pa.size(), pb.data(), pb.size(), &a, &b);
        } else if (split_fraction > 0.0) {
            status = lse_vertical_split_fraction(ds, split_fraction, split_seed, &a, &b);
        } else {
            std::fprintf(stderr, "error: give --fraction or --peer-a/--peer-b\n");
            lse_dataset_free(ds);
            return 1;
        }
        if (status == LSE_OK)
            status = lse_dataset_save_csv(a, split_out_a.c_str(), split_id.c_str(),
                                          split_target.empty() ? "target" : split_target.c_str());
        if (status == LSE_OK)
            status = lse_dataset_save_csv(b, split_out_b.c_str(), split_id.c_str(),
                                          split_target.empty() ? "target" : split_target.c_str());
        if (status == LSE_OK) {
            uint64_t da = 0, db = 0;
            lse_dataset_features(a, &da);
            lse_dataset_features(b, &db);
            std::printf("peer A: %llu features -> %s\npeer B: %llu features -> %s\n",
                        static_cast<unsigned long long>(da), split_out_a.c_str(),
                        static_cast<unsigned long long>(db), split_out_b.c_str());
        }
        lse_dataset_free(a);
        lse_dataset_free(b);
        lse_dataset_free(ds);
        return report_status(status);
    }

    if (*train_ae) {
        if (ta_multitask && (ta_target.empty() || ta_task.empty())) {
            std::fprintf(stderr, "error: --multitask requires --target-col and --task\n");
            return 1;
        }
        lse_dataset* ds = nullptr;
        lse_status status = lse_dataset_load_csv(ta_input.c_str(), ta_id.c_str(),
                                                 ta_target.empty() ? nullptr : ta_target.c_str(),
                                                 ta_task.empty() ? nullptr : ta_task.c_str(), &ds);
        if (status != LSE_OK) return report_status(status);
        std::string options = "{\"latent_dim\":" + std::to_string(ta_latent) +
                              ",\"epochs\":" + std::to_string(ta_epochs) +
                              ",\"batch_size\":" + std::to_string(ta_batch) +
                              ",\"learning_rate\":" + std::to_string(ta_lr) +
                              ",\"val_fraction\":" + std::to_string(ta_val_fraction) +
                              ",\"seed\":" + std::to_string(ta_seed);
        if (ta_multitask) options += ",\"multitask\":{\"lambda\":" + std::to_string(ta_lambda) + "}";
        options += "}";
        lse_model* model = nullptr;
        status = lse_train_autoencoder(ds, options.c_str(), &model);
        if (status == LSE_OK) status = lse_model_save(model, ta_out.c_str());
        if (status == LSE_OK) std::printf("checkpoint -> %s\n", ta_out.c_str());
        lse_model_free(model);
        lse_dataset_free(ds);
        return report_status(status);
    }

    if (*embed) {
        lse_model* model = nullptr;
        lse_status status = lse_model_load(em_model.c_str(), &model);
        if (status != LSE_OK) return report_status(status);
        lse_dataset* ds = nullptr;
        status = lse_dataset_load_csv(em_input.c_str(), em_id.c_str(),
                                      em_target.empty() ? nullptr : em_target.c_str(), nullptr, &ds);
        lse_table* table = nullptr;
        if (status == LSE_OK) status = lse_model_encode(model, ds, em_tag.c_str(), &table);
        if (status == LSE_OK) status = lse_table_write(table, em_out.c_str());
        if (status == LSE_OK && !em_csv.empty()) status = lse_table_write_csv(table, em_csv.c_str());
        if (status == LSE_OK) {
            uint64_t rows = 0, dim = 0;
            lse_table_rows(table, &rows);
            lse_table_dim(table, &dim);
            std::printf("%llu rows x %llu dims -> %s\n", static_cast<unsigned long long>(rows),
                        static_cast<unsigned long long>(dim), em_out.c_str());
        }
        lse_table_free(table);
        lse_dataset_free(ds);
        lse_model_free(model);
        return report_status(status);
    }

    if (*serve) {
        StringOut path;
        const lse_status status = lse_exchange_serve(sv_bind.c_str(), sv_port, sv_out_dir.c_str(),
                                                     sv_timeout, &path.value);
        if (status == LSE_OK) std::printf("received -> %s\n", path.value);
        return report_status(status);
    }

    if (*send) {
        uint64_t bytes = 0;
        const lse_status status = lse_exchange_send(sd_host.c_str(), sd_port, sd_file.c_str(),
                                                    sd_timeout, &bytes);
        if (status == LSE_OK)
            std::printf("sent %llu bytes\n", static_cast<unsigned long long>(bytes));
        return report_status(status);
    }

    if (*join) {
        const lse_status status =
            lse_join_tables_csv(jn_a.c_str(), jn_b.c_str(), jn_mode.c_str(), jn_out.c_str());
        if (status == LSE_OK) std::printf("joined -> %s\n", jn_out.c_str());
        return report_status(status);
    }

    if (*downstream) {
        std::string options;
        if (td_search_samples > 0) {
            options = "{\"search\":{\"n_samples\":" + std::to_string(td_search_samples) +
                      ",\"n_folds\":" + std::to_string(td_search_folds) +
                      ",\"seed\":" + std::to_string(td_seed) + "}}";
        } else {
            options = "{\"l2\":" + std::to_string(td_l2) + ",\"learning_rate\":" + std::to_string(td_lr) +
                      ",\"epochs\":" + std::to_string(td_epochs) +
                      ",\"batch_size\":" + std::to_string(td_batch) +
                      ",\"seed\":" + std::to_string(td_seed);
            if (!td_kind.empty()) options += ",\"kind\":\"" + td_kind + "\"";
            options += "}";
        }
        StringOut metrics;
        const lse_status status = lse_train_downstream(
            td_train.c_str(), td_eval.empty() ? nullptr : td_eval.c_str(), td_id.c_str(),
            td_target.c_str(), td_task.c_str(), options.c_str(), &metrics.value);
        if (status == LSE_OK) std::fputs(metrics.value, stdout);
        return report_status(status);
    }

    if (*run) {
        StringOut run_dir;
        const lse_status status = lse_run_scenario(rs_manifest.c_str(), &run_dir.value);
        if (status == LSE_OK) std::printf("run directory: %s\n", run_dir.value);
        return report_status(status);
    }

    if (*report) {
        std::vector<const char*> paths;
        for (const auto& s : rp_inputs) paths.push_back(s.c_str());
        StringOut document;
        lse_status status =
            lse_merge_reports(paths.data(), paths.size(), rp_format.c_str(), &document.value);
        if (status == LSE_OK) {
            if (rp_out.empty()) {
                std::fputs(document.value, stdout);
            } else {
                std::FILE* f = std::fopen(rp_out.c_str(), "wb");
                if (!f) {
                    std::fprintf(stderr, "error: cannot write '%s'\n", rp_out.c_str());
                    return 3;
                }
                std::fputs(document.value, f);
                std::fclose(f);
            }
        }
        return report_status(status);
    }

    if (*gradcheck) {
        double max_rel = 0.0;
        const lse_status status = lse_gradcheck(gc_networks, gc_seed, &max_rel);
        if (status != LSE_OK) return report_status(status);
        std::printf("max relative error over %llu networks: %.3e\n",
                    static_cast<unsigned long long>(gc_networks), max_rel);
        if (max_rel >= 1e-4) {
            std::fprintf(stderr, "error: gradient check failed (threshold 1e-4)\n");
            return 3;
        }
        return 0;
    }

    return 1;
}
