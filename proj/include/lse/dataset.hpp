#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lse/matrix.hpp"

namespace lse {

enum class Task { regression, classification };

Task task_from_string(const std::string& s);
const char* task_name(Task t);

// Tabular dataset: unique string IDs, named numeric feature columns and an
// optional prediction target.
struct Dataset {
    std::vector<std::string> ids;
    std::vector<std::string> feature_names;
    Matrix features;  // n x d
    std::vector<double> target;  // empty when absent; class indices for classification
    std::optional<Task> task;

    std::size_t num_rows() const { return features.rows(); }
    std::size_t num_features() const { return features.cols(); }
    bool has_target() const { return !target.empty(); }

    // Class labels as ints; requires task == classification with integral
    // non-negative target values.
    std::vector<int> class_labels() const;

    // Rows restricted to the given indices (ids, features and target).
    Dataset select_rows(const std::vector<std::size_t>& indices) const;

    // Throws when an invariant is broken (duplicate ids, length mismatches).
    void validate() const;
};

}  // namespace lse
