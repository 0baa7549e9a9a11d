#pragma once

#include <string>
#include <vector>

#include "lse/matrix.hpp"

namespace lse {

// Observation IDs paired with latent vectors; the artifact peers exchange.
struct EmbeddingTable {
    std::vector<std::string> ids;
    Matrix vectors;  // n x M
    std::string source_tag;

    std::size_t num_rows() const { return vectors.rows(); }
    std::size_t latent_dim() const { return vectors.cols(); }

    void validate() const;
};

enum class JoinMode { strict, inner };

struct JoinedEmbeddings {
    std::vector<std::string> ids;
    Matrix features;  // n x (Ma + Mb), peer-a columns first
};

// Aligns rows by ID, a's columns first, row order following a. strict
// requires identical ID sets; inner keeps the intersection.
JoinedEmbeddings join_embeddings(const EmbeddingTable& a, const EmbeddingTable& b, JoinMode mode);

}  // namespace lse
