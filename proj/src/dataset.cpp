#include "confgate/dataset.hpp"

#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "confgate/errors.hpp"

namespace confgate {

bool Batch::has_severities() const {
  if (responses.empty()) return false;
  for (const Response& r : responses) {
    if (!r.severity.has_value()) return false;
  }
  return true;
}

EmbeddingMatrix Batch::embeddings(bool unit_norm) const {
  if (responses.empty()) throw EmptyInput("batch " + query_id + " has no responses");
  const std::size_t d = responses.front().embedding.size();
  std::vector<double> flat;
  flat.reserve(responses.size() * d);
  for (const Response& r : responses) {
    if (r.embedding.size() != d) {
      throw DimensionMismatch("batch " + query_id +
                              " mixes embedding dimensions");
    }
    flat.insert(flat.end(), r.embedding.begin(), r.embedding.end());
  }
  return EmbeddingMatrix(std::move(flat), responses.size(), d, unit_norm);
}

std::vector<double> Batch::severities() const {
  std::vector<double> out;
  out.reserve(responses.size());
  for (const Response& r : responses) {
    if (!r.severity.has_value()) {
      throw EmptyInput("batch " + query_id + " is missing severities");
    }
    out.push_back(*r.severity);
  }
  return out;
}

BatchDataset load_jsonl(const std::string& path, bool normalize) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  BatchDataset dataset;
  dataset.normalized = normalize;
  std::unordered_map<std::string, std::size_t> batch_index;
  std::optional<std::size_t> dim;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (!obj.is_object() || !obj.contains("query_id") ||
        !obj.contains("response_id") || !obj.contains("embedding")) {
      throw ParseError(line_no,
                       "expected an object with query_id, response_id, embedding");
    }

    Response resp;
    std::string query_id;
    try {
      query_id = obj.at("query_id").get<std::string>();
      resp.response_id = obj.at("response_id").get<std::string>();
      resp.embedding = obj.at("embedding").get<std::vector<double>>();
      if (obj.contains("severity") && !obj.at("severity").is_null()) {
        resp.severity = obj.at("severity").get<double>();
      }
      if (obj.contains("text") && !obj.at("text").is_null()) {
        resp.text = obj.at("text").get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }

    if (resp.embedding.empty()) {
      throw ParseError(line_no, "embedding is empty");
    }
    if (!dim.has_value()) {
      dim = resp.embedding.size();
    } else if (resp.embedding.size() != *dim) {
      throw DimensionMismatch("query " + query_id + ": embedding dimension " +
                              std::to_string(resp.embedding.size()) +
                              " does not match dataset dimension " +
                              std::to_string(*dim));
    }
    if (resp.severity.has_value() &&
        (*resp.severity < 0.0 || *resp.severity > 1.0)) {
      throw SeverityOutOfRange(resp.response_id, *resp.severity);
    }

    auto [it, inserted] = batch_index.try_emplace(query_id, dataset.batches.size());
    if (inserted) {
      dataset.batches.push_back(Batch{query_id, {}});
    }
    dataset.batches[it->second].responses.push_back(std::move(resp));
  }

  if (normalize) {
    for (Batch& batch : dataset.batches) {
      EmbeddingMatrix normalized = unit_normalize(batch.embeddings(false));
      for (std::size_t i = 0; i < batch.responses.size(); ++i) {
        const auto row = normalized.row(i);
        batch.responses[i].embedding.assign(row.begin(), row.end());
      }
    }
  }
  return dataset;
}

}  // namespace confgate
