#pragma once

#include <optional>
#include <string>
#include <vector>

#include "confgate/geometry.hpp"

namespace confgate {

struct Response {
  std::string response_id;
  std::vector<double> embedding;
  std::optional<double> severity;  // in [0, 1], larger = worse
  std::optional<std::string> text;
};

struct Batch {
  std::string query_id;
  std::vector<Response> responses;

  std::size_t size() const noexcept { return responses.size(); }
  bool has_severities() const;

  // Row-stacks the response embeddings. Pass unit_norm = true to claim the
  // rows are unit-norm; the claim is verified and scoring paths require it.
  EmbeddingMatrix embeddings(bool unit_norm) const;

  // Severities in response order; throws EmptyInput if any is missing.
  std::vector<double> severities() const;
};

struct BatchDataset {
  std::vector<Batch> batches;
  bool normalized = true;

  std::size_t size() const noexcept { return batches.size(); }
};

// One JSON object per line: {query_id, response_id, embedding, severity?,
// text?}. Responses are grouped by query_id preserving file order; embedding
// dimensions must agree across the whole dataset; severities must lie in
// [0, 1]. Embeddings are unit-normalized on load unless normalize = false.
BatchDataset load_jsonl(const std::string& path, bool normalize = true);

}  // namespace confgate
