#pragma once

#include "scoregan/common.hpp"
#include "scoregan/corpus.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scoregan {

/// One embedding row per vocab id.
struct EmbeddingTable {
  Matrix vectors;  // |vocab| rows x dim cols

  int dim() const { return static_cast<int>(vectors.cols()); }
  int rows() const { return static_cast<int>(vectors.rows()); }

  /// Embeddings of a token sequence as columns: dim x n.
  Matrix columns(const std::vector<int>& ids) const {
    Matrix out(vectors.cols(), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t j = 0; j < ids.size(); ++j)
      out.col(static_cast<Eigen::Index>(j)) = vectors.row(ids[j]).transpose();
    return out;
  }
};

/// Reads the standard text format: token followed by dim reals per line.
/// Vocab tokens found in the file take the file vector; everything else
/// (including END and UNK) gets a seeded uniform row in [-0.1, 0.1].
EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                               int dim, std::uint64_t seed);

/// All-random table, same row rule as missing tokens in load_embeddings.
EmbeddingTable random_embeddings(const Vocab& vocab, int dim, std::uint64_t seed);

}  // namespace scoregan
