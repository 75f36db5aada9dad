#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "confgate/dataset.hpp"
#include "confgate/errors.hpp"
#include "confgate/gate_io.hpp"
#include "confgate/report.hpp"
#include "confgate/rng.hpp"

using namespace confgate;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("confgate_io_test_" + std::to_string(++counter));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_jsonl groups by query_id preserving order") {
  TempDir dir;
  const std::string path = dir.file("data.jsonl");
  write_file(path,
             R"({"query_id":"q1","response_id":"a","embedding":[1,0]})" "\n"
             R"({"query_id":"q2","response_id":"b","embedding":[0,1]})" "\n"
             R"({"query_id":"q1","response_id":"c","embedding":[3,4]})" "\n");
  const BatchDataset ds = load_jsonl(path);
  REQUIRE(ds.size() == 2);
  CHECK(ds.batches[0].query_id == "q1");
  REQUIRE(ds.batches[0].size() == 2);
  CHECK(ds.batches[0].responses[0].response_id == "a");
  CHECK(ds.batches[0].responses[1].response_id == "c");
  CHECK(ds.batches[1].query_id == "q2");

  // [3,4] normalized on load
  CHECK(ds.batches[0].responses[1].embedding[0] == doctest::Approx(0.6));
  CHECK(ds.batches[0].responses[1].embedding[1] == doctest::Approx(0.8));
}

TEST_CASE("load_jsonl can skip normalization") {
  TempDir dir;
  const std::string path = dir.file("raw.jsonl");
  write_file(path, R"({"query_id":"q","response_id":"a","embedding":[3,4]})" "\n");
  const BatchDataset ds = load_jsonl(path, false);
  CHECK_FALSE(ds.normalized);
  CHECK(ds.batches[0].responses[0].embedding[0] == 3.0);
}

TEST_CASE("load_jsonl reports parse errors with line numbers") {
  TempDir dir;
  const std::string path = dir.file("bad.jsonl");
  write_file(path,
             R"({"query_id":"q","response_id":"a","embedding":[1,0]})" "\n"
             "not json\n");
  try {
    load_jsonl(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("load_jsonl rejects out-of-range severities and mixed dimensions") {
  TempDir dir;
  const std::string bad_sev = dir.file("sev.jsonl");
  write_file(bad_sev,
             R"({"query_id":"q","response_id":"a","embedding":[1,0],"severity":1.2})" "\n");
  CHECK_THROWS_AS(load_jsonl(bad_sev), SeverityOutOfRange);

  const std::string bad_dim = dir.file("dim.jsonl");
  write_file(bad_dim,
             R"({"query_id":"q","response_id":"a","embedding":[1,0]})" "\n"
             R"({"query_id":"r","response_id":"b","embedding":[1,0,0]})" "\n");
  CHECK_THROWS_AS(load_jsonl(bad_dim), DimensionMismatch);

  CHECK_THROWS_AS(load_jsonl(dir.file("missing.jsonl")), IoError);
}

TEST_CASE("load_jsonl keeps optional severity and text") {
  TempDir dir;
  const std::string path = dir.file("opt.jsonl");
  write_file(path,
             R"({"query_id":"q","response_id":"a","embedding":[1,0],"severity":0.5,"text":"hello"})" "\n"
             R"({"query_id":"q","response_id":"b","embedding":[0,1]})" "\n");
  const BatchDataset ds = load_jsonl(path);
  CHECK(*ds.batches[0].responses[0].severity == 0.5);
  CHECK(*ds.batches[0].responses[0].text == "hello");
  CHECK_FALSE(ds.batches[0].responses[1].severity.has_value());
  CHECK_FALSE(ds.batches[0].has_severities());
}

TEST_CASE("calibrated gates round-trip losslessly") {
  TempDir dir;
  SplitMix64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    CalibratedGate gate;
    gate.q = rep == 0 ? kResidualBound : rng.next_double();
    gate.method = static_cast<GateMethod>(rng.next_below(4));
    gate.alpha = 0.01 + 0.5 * rng.next_double();
    gate.batches = rng.next_below(100);
    gate.batch_size = rng.next_below(100);
    gate.bootstrap_k = rng.next_below(1000);
    gate.seed = rng.next_u64();
    const std::string path = dir.file("gate.json");
    save_gate(gate, path);
    const AnyGate loaded = load_gate(path);
    REQUIRE(std::holds_alternative<CalibratedGate>(loaded));
    const CalibratedGate& g = std::get<CalibratedGate>(loaded);
    CHECK(std::memcmp(&g.q, &gate.q, sizeof(double)) == 0);
    CHECK(std::memcmp(&g.alpha, &gate.alpha, sizeof(double)) == 0);
    CHECK(g.method == gate.method);
    CHECK(g.batches == gate.batches);
    CHECK(g.batch_size == gate.batch_size);
    CHECK(g.bootstrap_k == gate.bootstrap_k);
    CHECK(g.seed == gate.seed);
    CHECK(g.convention == gate.convention);
  }
}

TEST_CASE("alignment gates round-trip losslessly") {
  TempDir dir;
  SplitMix64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    AlignmentGate gate;
    gate.tau_hat = rep == 0 ? 1.0 : rng.next_double();
    gate.alpha = 0.01 + 0.5 * rng.next_double();
    gate.batches = rng.next_below(100);
    gate.k_index = rng.next_below(100);
    gate.seed = rng.next_u64();
    gate.predicate.kind =
        rep % 2 == 0 ? PredicateKind::cvar_gap : PredicateKind::median_gap;
    gate.predicate.tail_q = rng.next_double();
    gate.predicate.delta = rng.next_double();
    gate.predicate.threshold_r = rng.next_double();
    const std::string path = dir.file("align.json");
    save_gate(gate, path);
    const AnyGate loaded = load_gate(path);
    REQUIRE(std::holds_alternative<AlignmentGate>(loaded));
    const AlignmentGate& g = std::get<AlignmentGate>(loaded);
    CHECK(std::memcmp(&g.tau_hat, &gate.tau_hat, sizeof(double)) == 0);
    CHECK(std::memcmp(&g.predicate.tail_q, &gate.predicate.tail_q,
                      sizeof(double)) == 0);
    CHECK(g.predicate.kind == gate.predicate.kind);
    CHECK(g.k_index == gate.k_index);
    CHECK(g.seed == gate.seed);
  }
}

TEST_CASE("unknown schema versions are rejected") {
  TempDir dir;
  const std::string path = dir.file("future.json");
  write_file(path, R"({"schema_version": 999, "method": "split"})");
  CHECK_THROWS_AS(load_gate(path), VersionMismatch);

  const std::string none = dir.file("none.json");
  write_file(none, R"({"method": "split"})");
  CHECK_THROWS_AS(load_gate(none), VersionMismatch);
}

TEST_CASE("trial CSV round-trips rows and echoes the run config") {
  TempDir dir;
  TrialReport rep;
  rep.method = "bbucp";
  rep.alpha = 0.1;
  rep.proportion_metric = "coverage";
  rep.proportion = 0.9375;
  rep.se = binomial_se(0.9375, 320);
  rep.mean_threshold = 0.123456789012345678;
  rep.delta_fs_median = 0.25;
  rep.delta_cvar = 0.125;
  rep.n_trials = 320;
  rep.seed = 42;

  RunConfig config;
  config.set("command", "simulate");
  config.set("seed", std::uint64_t{42});

  const std::string path = dir.file("trials.csv");
  {
    std::ofstream out(path);
    write_trial_csv(out, {rep}, config);
  }
  {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "# command=simulate");
  }
  const auto rows = read_trial_csv(path);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].metric == "coverage");
  CHECK(rows[0].value == 0.9375);
  CHECK(rows[0].se == format_double(rep.se));
  CHECK(rows[1].metric == "mean_threshold");
  CHECK(rows[1].value == rep.mean_threshold);  // %.17g survives the round trip
  CHECK(rows[2].metric == "delta_fs_median");
  CHECK(rows[3].metric == "delta_cvar");
  CHECK(rows[3].seed == 42);
}
