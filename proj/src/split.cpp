#include "lse/split.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "lse/error.hpp"
#include "lse/rng.hpp"

namespace lse {

RowSplit row_split(std::size_t n, SplitFractions fractions, std::uint64_t seed) {
    if (n < 3) throw usage_error("row_split: need at least 3 rows, got " + std::to_string(n));
    if (fractions.train <= 0.0 || fractions.val <= 0.0 || fractions.test <= 0.0)
        throw usage_error("row_split: fractions must be positive");
    const double total = fractions.train + fractions.val + fractions.test;
    if (std::abs(total - 1.0) > 1e-9)
        throw usage_error("row_split: fractions sum to " + std::to_string(total) + ", expected 1");

    Rng rng(seed);
    const std::vector<std::size_t> order = rng.permutation(n);

    const auto n_val = static_cast<std::size_t>(std::floor(fractions.val * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(fractions.test * static_cast<double>(n)));
    const std::size_t n_train = n - n_val - n_test;

    RowSplit split;
    split.seed = seed;
    split.train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.val_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                         order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    split.test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    return split;
}

namespace {

Dataset project_columns(const Dataset& ds, const std::vector<std::size_t>& cols) {
    Dataset out;
    out.ids = ds.ids;
    out.target = ds.target;
    out.task = ds.task;
    out.feature_names.reserve(cols.size());
    for (std::size_t c : cols) out.feature_names.push_back(ds.feature_names[c]);
    out.features = Matrix(ds.num_rows(), cols.size());
    for (std::size_t i = 0; i < ds.num_rows(); ++i) {
        const double* src = ds.features.row(i);
        double* dst = out.features.row(i);
        for (std::size_t k = 0; k < cols.size(); ++k) dst[k] = src[cols[k]];
    }
    return out;
}

}  // namespace

VerticalSplitResult vertical_split(const Dataset& ds, const VerticalSpec& spec, std::uint64_t seed) {
    const std::size_t d = ds.num_features();
    if (d < 2) throw usage_error("vertical_split: need at least 2 features, got " + std::to_string(d));

    std::vector<std::size_t> cols_a, cols_b;
    if (spec.fraction) {
        const double f = *spec.fraction;
        if (!(f > 0.0 && f < 1.0))
            throw usage_error("vertical_split: fraction must be in (0, 1), got " + std::to_string(f));
        Rng rng(seed);
        const std::vector<std::size_t> order = rng.permutation(d);
        const auto cut = static_cast<std::size_t>(std::floor(f * static_cast<double>(d)));
        if (cut == 0 || cut == d)
            throw usage_error("vertical_split: fraction " + std::to_string(f) +
                              " leaves one peer without features");
        cols_a.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
        cols_b.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
    } else {
        if (spec.peer_a_columns.empty() || spec.peer_b_columns.empty())
            throw usage_error("vertical_split: both explicit column lists must be nonempty");
        std::unordered_map<std::string, std::size_t> by_name;
        for (std::size_t c = 0; c < d; ++c) by_name.emplace(ds.feature_names[c], c);
        std::unordered_set<std::string> taken;
        auto resolve = [&](const std::vector<std::string>& names, std::vector<std::size_t>& out) {
            for (const auto& name : names) {
                const auto it = by_name.find(name);
                if (it == by_name.end())
                    throw usage_error("vertical_split: unknown feature '" + name + "'");
                if (!taken.insert(name).second)
                    throw usage_error("vertical_split: feature '" + name + "' assigned to both peers");
                out.push_back(it->second);
            }
        };
        resolve(spec.peer_a_columns, cols_a);
        resolve(spec.peer_b_columns, cols_b);
        if (taken.size() != d)
            throw usage_error("vertical_split: column lists cover " + std::to_string(taken.size()) +
                              " of " + std::to_string(d) + " features");
    }

    return VerticalSplitResult{project_columns(ds, cols_a), project_columns(ds, cols_b)};
}

}  // namespace lse
