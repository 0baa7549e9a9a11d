#include "lse/manifest.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "lse/error.hpp"
#include "lse/rng.hpp"

namespace lse {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& message) { throw usage_error("manifest: " + message); }

void check_known_keys(const json& obj, const std::string& where,
                      const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) bad("unknown key '" + key + "' in " + where);
}

ParamScale scale_from_string(const std::string& s) {
    if (s == "uniform") return ParamScale::uniform;
    if (s == "log_uniform") return ParamScale::log_uniform;
    if (s == "uniform_int") return ParamScale::uniform_int;
    bad("unknown scale '" + s + "' (expected uniform, log_uniform or uniform_int)");
}

}  // namespace

ExperimentManifest parse_manifest(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw usage_error(std::string("manifest: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) bad("top level must be an object");
    check_known_keys(doc, "manifest",
                     {"name", "scenario", "seed", "output_dir", "dataset", "subsample", "split",
                      "vertical_split", "autoencoder", "learner", "search", "threads"});

    ExperimentManifest m;
    try {
        if (!doc.contains("scenario")) bad("missing required key 'scenario'");
        m.scenario = doc["scenario"].get<int>();
        m.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("output_dir")) m.output_dir = doc["output_dir"].get<std::string>();
        if (doc.contains("threads")) m.threads = doc["threads"].get<int>();

        if (!doc.contains("dataset")) bad("missing required key 'dataset'");
        const json& ds = doc["dataset"];
        check_known_keys(ds, "dataset", {"path", "id_column", "target_column", "task"});
        if (!ds.contains("path")) bad("dataset.path is required");
        m.dataset_path = ds["path"].get<std::string>();
        m.id_column = ds.value("id_column", std::string("id"));
        if (!ds.contains("target_column")) bad("dataset.target_column is required");
        m.target_column = ds["target_column"].get<std::string>();
        if (!ds.contains("task")) bad("dataset.task is required");
        m.task = task_from_string(ds["task"].get<std::string>());

        m.name = doc.value("name", m.dataset_path.stem().string());

        if (doc.contains("subsample")) {
            const json& sub = doc["subsample"];
            check_known_keys(sub, "subsample", {"rows"});
            m.subsample_rows = sub.at("rows").get<std::size_t>();
        }

        if (doc.contains("split")) {
            const json& sp = doc["split"];
            check_known_keys(sp, "split", {"train", "val", "test"});
            m.split.train = sp.value("train", 0.70);
            m.split.val = sp.value("val", 0.15);
            m.split.test = sp.value("test", 0.15);
        }

        if (doc.contains("vertical_split")) {
            const json& vs = doc["vertical_split"];
            check_known_keys(vs, "vertical_split", {"fraction", "peer_a", "peer_b"});
            VerticalSpec spec;
            if (vs.contains("fraction")) {
                spec.fraction = vs["fraction"].get<double>();
                if (vs.contains("peer_a") || vs.contains("peer_b"))
                    bad("vertical_split: give either a fraction or explicit lists, not both");
            } else {
                if (!vs.contains("peer_a") || !vs.contains("peer_b"))
                    bad("vertical_split: need 'fraction' or both 'peer_a' and 'peer_b'");
                spec.peer_a_columns = vs["peer_a"].get<std::vector<std::string>>();
                spec.peer_b_columns = vs["peer_b"].get<std::vector<std::string>>();
            }
            m.vertical = std::move(spec);
        }

        if (doc.contains("autoencoder")) {
            const json& ae = doc["autoencoder"];
            check_known_keys(ae, "autoencoder",
                             {"latent_dim", "encoder_hidden", "multitask_lambda", "epochs",
                              "batch_size", "learning_rate"});
            m.latent_dim = ae.value("latent_dim", std::size_t{32});
            if (ae.contains("encoder_hidden"))
                m.encoder_hidden = ae["encoder_hidden"].get<std::vector<std::size_t>>();
            m.multitask_lambda = ae.value("multitask_lambda", 1.0);
            m.ae_epochs = ae.value("epochs", std::size_t{200});
            m.ae_batch_size = ae.value("batch_size", std::size_t{128});
            m.ae_learning_rate = ae.value("learning_rate", 0.0001);
        }

        if (doc.contains("learner") && doc.contains("search"))
            bad("give either 'learner' or 'search', not both");

        if (doc.contains("learner")) {
            const json& l = doc["learner"];
            check_known_keys(l, "learner", {"kind", "l2", "learning_rate", "epochs", "batch_size"});
            LearnerSpec spec;
            spec.kind = l.contains("kind") ? learner_kind_from_string(l["kind"].get<std::string>())
                                           : (m.task == Task::regression ? LearnerKind::ridge
                                                                         : LearnerKind::logistic);
            spec.l2 = l.value("l2", 0.0);
            spec.learning_rate = l.value("learning_rate", 0.01);
            spec.epochs = l.value("epochs", std::size_t{100});
            spec.batch_size = l.value("batch_size", std::size_t{128});
            m.learner = spec;
        }

        if (doc.contains("search")) {
            const json& s = doc["search"];
            check_known_keys(s, "search", {"n_samples", "n_folds", "space"});
            SearchSpace space = default_search_space(
                m.task == Task::regression ? LearnerKind::ridge : LearnerKind::logistic);
            space.n_samples = s.value("n_samples", std::size_t{20});
            space.n_folds = s.value("n_folds", std::size_t{3});
            if (s.contains("space")) {
                space.params.clear();
                for (const auto& [pname, pdef] : s["space"].items()) {
                    check_known_keys(pdef, "search.space." + pname, {"scale", "lo", "hi"});
                    ParamRange range;
                    range.name = pname;
                    range.scale = scale_from_string(pdef.value("scale", std::string("uniform")));
                    range.lo = pdef.at("lo").get<double>();
                    range.hi = pdef.at("hi").get<double>();
                    space.params.push_back(std::move(range));
                }
            }
            m.search = std::move(space);
        }
    } catch (const json::exception& e) {
        throw usage_error(std::string("manifest: ") + e.what());
    }

    m.validate();
    return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("manifest: cannot open '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text);
}

void ExperimentManifest::validate() const {
    if (scenario < 0 || scenario > 4)
        bad("scenario must be in 0..4, got " + std::to_string(scenario));
    if ((scenario == 2 || scenario == 4) && !vertical)
        bad("scenario " + std::to_string(scenario) + " requires a vertical_split block");
    if (vertical && scenario != 2 && scenario != 4)
        bad("vertical_split is only meaningful for scenarios 2 and 4");
    const double total = split.train + split.val + split.test;
    if (split.train <= 0 || split.val <= 0 || split.test <= 0 || std::abs(total - 1.0) > 1e-9)
        bad("split fractions must be positive and sum to 1");
    if (scenario >= 1) {
        if (latent_dim < 1) bad("autoencoder.latent_dim must be >= 1");
        if (ae_epochs < 1) bad("autoencoder.epochs must be >= 1");
        if (ae_batch_size < 1) bad("autoencoder.batch_size must be >= 1");
    }
    if ((scenario == 3 || scenario == 4) && multitask_lambda < 0)
        bad("autoencoder.multitask_lambda must be >= 0");
    if (subsample_rows && *subsample_rows < 3) bad("subsample.rows must be >= 3");
    if (threads < 0) bad("threads must be >= 0");
}

std::string ExperimentManifest::canonical_json() const {
    json doc;
    doc["name"] = name;
    doc["scenario"] = scenario;
    doc["seed"] = seed;
    doc["dataset"] = {{"path", dataset_path.string()},
                      {"id_column", id_column},
                      {"target_column", target_column},
                      {"task", task_name(task)}};
    if (subsample_rows) doc["subsample"] = {{"rows", *subsample_rows}};
    doc["split"] = {{"train", split.train}, {"val", split.val}, {"test", split.test}};
    if (vertical) {
        json vs;
        if (vertical->fraction) vs["fraction"] = *vertical->fraction;
        else {
            vs["peer_a"] = vertical->peer_a_columns;
            vs["peer_b"] = vertical->peer_b_columns;
        }
        doc["vertical_split"] = vs;
    }
    if (scenario >= 1) {
        json ae{{"latent_dim", latent_dim},
                {"encoder_hidden", encoder_hidden},
                {"epochs", ae_epochs},
                {"batch_size", ae_batch_size},
                {"learning_rate", ae_learning_rate}};
        if (scenario == 3 || scenario == 4) ae["multitask_lambda"] = multitask_lambda;
        doc["autoencoder"] = ae;
    }
    if (learner) {
        doc["learner"] = {{"kind", learner_kind_name(learner->kind)},
                          {"l2", learner->l2},
                          {"learning_rate", learner->learning_rate},
                          {"epochs", learner->epochs},
                          {"batch_size", learner->batch_size}};
    }
    if (search) {
        json space = json::object();
        for (const auto& p : search->params) {
            const char* scale = p.scale == ParamScale::uniform ? "uniform"
                                : p.scale == ParamScale::log_uniform ? "log_uniform"
                                                                     : "uniform_int";
            space[p.name] = {{"scale", scale}, {"lo", p.lo}, {"hi", p.hi}};
        }
        doc["search"] = {{"n_samples", search->n_samples}, {"n_folds", search->n_folds}, {"space", space}};
    }
    return doc.dump();  // nlohmann objects iterate sorted by key
}

std::string ExperimentManifest::config_digest() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_json())));
    return std::string(buf);
}

}  // namespace lse
