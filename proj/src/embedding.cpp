#include "scoregan/embedding.hpp"

#include "scoregan/rng.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace scoregan {

namespace {

// Each row draws from a stream keyed by its vocab id, so a token's random
// vector does not depend on which other tokens were found in the file.
void fill_random_row(EmbeddingTable& table, int id, std::uint64_t seed) {
  Rng rng = Rng(seed).fork(static_cast<std::uint64_t>(id));
  for (int j = 0; j < table.dim(); ++j) table.vectors(id, j) = rng.uniform(-0.1, 0.1);
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                               int dim, std::uint64_t seed) {
  if (dim <= 0) throw ArgumentError("load_embeddings: dim must be positive");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);

  std::map<int, Vector> found;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<Scalar> values;
    Scalar x;
    while (ls >> x) values.push_back(x);
    if (static_cast<int>(values.size()) != dim) {
      throw FormatError("embedding line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, got " +
                        std::to_string(values.size()));
    }
    if (!vocab.contains(token)) continue;
    int id = vocab.id_of(token);
    if (found.count(id)) continue;  // first occurrence wins
    found[id] = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }

  EmbeddingTable table;
  table.vectors = Matrix::Zero(vocab.size(), dim);
  for (int id = 0; id < vocab.size(); ++id) {
    auto it = found.find(id);
    if (it != found.end()) {
      table.vectors.row(id) = it->second.transpose();
    } else {
      fill_random_row(table, id, seed);
    }
  }
  return table;
}

EmbeddingTable random_embeddings(const Vocab& vocab, int dim, std::uint64_t seed) {
  if (dim <= 0) throw ArgumentError("random_embeddings: dim must be positive");
  EmbeddingTable table;
  table.vectors = Matrix::Zero(vocab.size(), dim);
  for (int id = 0; id < vocab.size(); ++id) fill_random_row(table, id, seed);
  return table;
}

}  // namespace scoregan
