#include "confgate/gate_io.hpp"

#include <fstream>

#include <json.hpp>

#include "confgate/errors.hpp"

namespace confgate {

namespace {

void write_json(const nlohmann::json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("gate file: ") + e.what());
  }
}

void check_version(const nlohmann::json& doc) {
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    throw VersionMismatch("gate file is missing schema_version");
  }
  const int version = doc["schema_version"].get<int>();
  if (version != kGateSchemaVersion) {
    throw VersionMismatch("unsupported gate schema_version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kGateSchemaVersion) + ")");
  }
}

}  // namespace

void save_gate(const CalibratedGate& gate, const std::string& path) {
  nlohmann::json doc;
  doc["schema_version"] = kGateSchemaVersion;
  doc["method"] = to_string(gate.method);
  doc["alpha"] = gate.alpha;
  doc["q"] = gate.q;
  doc["J"] = gate.batches;
  doc["I"] = gate.batch_size;
  doc["K"] = gate.bootstrap_k;
  doc["seed"] = gate.seed;
  doc["convention"] = gate.convention;
  write_json(doc, path);
}

void save_gate(const AlignmentGate& gate, const std::string& path) {
  nlohmann::json doc;
  doc["schema_version"] = kGateSchemaVersion;
  doc["method"] = "align";
  doc["alpha"] = gate.alpha;
  doc["tau_hat"] = gate.tau_hat;
  doc["J"] = gate.batches;
  doc["I"] = 0;
  doc["K"] = gate.k_index;
  doc["seed"] = gate.seed;
  doc["convention"] = std::string(kQuantileConvention);
  doc["predicate"] = {{"kind", to_string(gate.predicate.kind)},
                      {"tail_q", gate.predicate.tail_q},
                      {"delta", gate.predicate.delta},
                      {"threshold_r", gate.predicate.threshold_r}};
  write_json(doc, path);
}

AnyGate load_gate(const std::string& path) {
  const nlohmann::json doc = read_json(path);
  check_version(doc);
  try {
    const std::string method = doc.at("method").get<std::string>();
    if (method == "align") {
      AlignmentGate gate;
      gate.alpha = doc.at("alpha").get<double>();
      gate.tau_hat = doc.at("tau_hat").get<double>();
      gate.batches = doc.at("J").get<std::size_t>();
      gate.k_index = doc.at("K").get<std::size_t>();
      gate.seed = doc.at("seed").get<std::uint64_t>();
      const auto& pred = doc.at("predicate");
      gate.predicate.kind =
          predicate_kind_from_string(pred.at("kind").get<std::string>());
      gate.predicate.tail_q = pred.at("tail_q").get<double>();
      gate.predicate.delta = pred.at("delta").get<double>();
      gate.predicate.threshold_r = pred.at("threshold_r").get<double>();
      return gate;
    }
    CalibratedGate gate;
    gate.method = gate_method_from_string(method);
    gate.alpha = doc.at("alpha").get<double>();
    gate.q = doc.at("q").get<double>();
    gate.batches = doc.at("J").get<std::size_t>();
    gate.batch_size = doc.at("I").get<std::size_t>();
    gate.bootstrap_k = doc.at("K").get<std::size_t>();
    gate.seed = doc.at("seed").get<std::uint64_t>();
    gate.convention = doc.at("convention").get<std::string>();
    return gate;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("gate file: ") + e.what());
  }
}

}  // namespace confgate
