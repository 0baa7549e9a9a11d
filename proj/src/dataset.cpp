#include "lse/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "lse/error.hpp"

namespace lse {

Task task_from_string(const std::string& s) {
    if (s == "regression") return Task::regression;
    if (s == "classification") return Task::classification;
    throw usage_error("unknown task '" + s + "' (expected 'regression' or 'classification')");
}

const char* task_name(Task t) {
    return t == Task::regression ? "regression" : "classification";
}

std::vector<int> Dataset::class_labels() const {
    if (!task || *task != Task::classification)
        throw usage_error("class_labels: dataset task is not classification");
    std::vector<int> labels(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double v = target[i];
        if (!(v >= 0.0) || v != std::floor(v))
            throw data_error("class_labels: target value " + std::to_string(v) + " at row " +
                             std::to_string(i) + " is not a non-negative integer");
        labels[i] = static_cast<int>(v);
    }
    return labels;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.feature_names = feature_names;
    out.task = task;
    out.features = features.select_rows(indices);
    out.ids.reserve(indices.size());
    for (std::size_t idx : indices) out.ids.push_back(ids[idx]);
    if (has_target()) {
        out.target.reserve(indices.size());
        for (std::size_t idx : indices) out.target.push_back(target[idx]);
    }
    return out;
}

void Dataset::validate() const {
    if (ids.size() != features.rows())
        throw data_error("dataset: " + std::to_string(ids.size()) + " ids for " +
                         std::to_string(features.rows()) + " feature rows");
    if (has_target() && target.size() != features.rows())
        throw data_error("dataset: " + std::to_string(target.size()) + " target values for " +
                         std::to_string(features.rows()) + " rows");
    if (feature_names.size() != features.cols())
        throw data_error("dataset: " + std::to_string(feature_names.size()) + " feature names for " +
                         std::to_string(features.cols()) + " columns");
    std::unordered_set<std::string> seen;
    seen.reserve(ids.size());
    for (const auto& id : ids)
        if (!seen.insert(id).second)
            throw data_error("dataset: duplicate id '" + id + "'");
}

}  // namespace lse
