#include "lse/embedding.hpp"

#include <unordered_map>
#include <unordered_set>

#include "lse/error.hpp"

namespace lse {

void EmbeddingTable::validate() const {
    if (ids.size() != vectors.rows())
        throw data_error("embedding table: " + std::to_string(ids.size()) + " ids for " +
                         std::to_string(vectors.rows()) + " vectors");
    std::unordered_set<std::string> seen;
    seen.reserve(ids.size());
    for (const auto& id : ids)
        if (!seen.insert(id).second) throw data_error("embedding table: duplicate id '" + id + "'");
    if (!vectors.all_finite()) throw data_error("embedding table: non-finite value");
}

JoinedEmbeddings join_embeddings(const EmbeddingTable& a, const EmbeddingTable& b, JoinMode mode) {
    if (a.num_rows() == 0 || b.num_rows() == 0)
        throw usage_error("join_embeddings: both tables must be nonempty");
    a.validate();
    b.validate();

    std::unordered_map<std::string, std::size_t> b_by_id;
    b_by_id.reserve(b.ids.size());
    for (std::size_t i = 0; i < b.ids.size(); ++i) b_by_id.emplace(b.ids[i], i);

    if (mode == JoinMode::strict) {
        std::size_t missing_in_b = 0;
        for (const auto& id : a.ids)
            if (!b_by_id.count(id)) ++missing_in_b;
        const std::size_t matched = a.ids.size() - missing_in_b;
        const std::size_t missing_in_a = b.ids.size() - matched;
        if (missing_in_b || missing_in_a)
            throw data_error("join_embeddings: strict join failed: " + std::to_string(missing_in_b) +
                             " missing in b, " + std::to_string(missing_in_a) + " missing in a");
    }

    JoinedEmbeddings joined;
    const std::size_t ma = a.latent_dim();
    const std::size_t mb = b.latent_dim();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row in a, row in b)
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
        const auto it = b_by_id.find(a.ids[i]);
        if (it == b_by_id.end()) continue;  // only possible in inner mode
        pairs.emplace_back(i, it->second);
        joined.ids.push_back(a.ids[i]);
    }
    joined.features = Matrix(pairs.size(), ma + mb);
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const double* va = a.vectors.row(pairs[r].first);
        const double* vb = b.vectors.row(pairs[r].second);
        double* dst = joined.features.row(r);
        for (std::size_t c = 0; c < ma; ++c) dst[c] = va[c];
        for (std::size_t c = 0; c < mb; ++c) dst[ma + c] = vb[c];
    }
    return joined;
}

}  // namespace lse
