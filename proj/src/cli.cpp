#include "confgate/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "confgate/conformal.hpp"
#include "confgate/dataset.hpp"
#include "confgate/errors.hpp"
#include "confgate/gate_io.hpp"
#include "confgate/geometry.hpp"
#include "confgate/harness.hpp"
#include "confgate/report.hpp"

namespace confgate {

namespace {

void emit_error(const std::string& type, const std::string& message) {
  nlohmann::json err;
  err["error"] = {{"type", type}, {"message", message}};
  std::cerr << err.dump() << std::endl;
}

// Seed precedence: explicit --seed flag, then CONFGATE_SEED, then default.
std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value,
                           std::uint64_t default_value) {
  if (flag_given) return flag_value;
  if (const char* env = std::getenv("CONFGATE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidConfig("CONFGATE_SEED is not a valid 64-bit seed: " +
                          std::string(env));
    }
  }
  return default_value;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::vector<ResidualBag> dataset_bags(const BatchDataset& dataset) {
  std::vector<ResidualBag> bags;
  bags.reserve(dataset.size());
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    bags.push_back(loo_residuals(dataset.batches[j].embeddings(true),
                                 static_cast<int>(j)));
  }
  return bags;
}

ResidualBag pool_bags(const std::vector<ResidualBag>& bags) {
  ResidualBag pooled;
  if (!bags.empty()) pooled.base_size = bags.front().base_size;
  for (const ResidualBag& bag : bags) {
    pooled.values.insert(pooled.values.end(), bag.values.begin(), bag.values.end());
    pooled.batch_ids.insert(pooled.batch_ids.end(), bag.batch_ids.begin(),
                            bag.batch_ids.end());
  }
  return pooled;
}

struct CommonFlags {
  std::string input;
  std::string output;
  bool no_normalize = false;
  std::uint64_t seed = 1;
  bool seed_given = false;
};

int cmd_score(const CommonFlags& flags) {
  const BatchDataset dataset = load_jsonl(flags.input, !flags.no_normalize);
  auto out = open_output(flags.output);

  RunConfig config;
  config.set("command", "score");
  config.set("input", flags.input);
  config.set("output", flags.output);
  config.set("normalize", flags.no_normalize ? "false" : "true");
  config.set("convention", kQuantileConvention);
  for (const auto& [key, value] : config.entries) {
    out << "# " << key << "=" << value << "\n";
  }
  out << "query_id,response_id,energy,atypical\n";
  for (const Batch& batch : dataset.batches) {
    const ScoreVector energy =
        interaction_energy(gram(batch.embeddings(true)));
    const ScoreVector atypical = atypical_score(energy);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out << batch.query_id << "," << batch.responses[i].response_id << ","
          << format_double(energy.values[i]) << ","
          << format_double(atypical.values[i]) << "\n";
    }
  }
  return 0;
}

int cmd_calibrate(const CommonFlags& flags, const std::string& method_name,
                  double alpha, std::size_t bootstrap_k) {
  const BatchDataset dataset = load_jsonl(flags.input, !flags.no_normalize);
  const GateMethod method = gate_method_from_string(method_name);
  const std::vector<ResidualBag> bags = dataset_bags(dataset);
  const std::uint64_t seed = resolve_seed(flags.seed_given, flags.seed, 1);

  CalibratedGate gate;
  switch (method) {
    case GateMethod::split:
      gate = split_ucp(pool_bags(bags), alpha);
      break;
    case GateMethod::full:
      gate = full_ucp_gate(pool_bags(bags), alpha);
      break;
    case GateMethod::bucp:
      gate = bucp(bags, alpha);
      break;
    case GateMethod::bbucp:
      gate = bbucp(bags, alpha, bootstrap_k, seed);
      break;
  }
  save_gate(gate, flags.output);
  return 0;
}

int cmd_gate(const CommonFlags& flags, const std::string& gate_path) {
  const BatchDataset dataset = load_jsonl(flags.input, !flags.no_normalize);
  const AnyGate gate = load_gate(gate_path);
  auto out = open_output(flags.output);

  RunConfig config;
  config.set("command", "gate");
  config.set("gate", gate_path);
  config.set("input", flags.input);
  config.set("output", flags.output);
  config.set("normalize", flags.no_normalize ? "false" : "true");
  for (const auto& [key, value] : config.entries) {
    out << "# " << key << "=" << value << "\n";
  }
  out << "query_id,response_id,score,kept\n";

  for (const Batch& batch : dataset.batches) {
    std::vector<double> scores;
    std::vector<bool> kept(batch.size(), false);
    if (const CalibratedGate* cg = std::get_if<CalibratedGate>(&gate)) {
      const ResidualBag bag = loo_residuals(batch.embeddings(true));
      scores = bag.values;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        kept[i] = apply_gate(*cg, scores[i]);
      }
    } else {
      const AlignmentGate& ag = std::get<AlignmentGate>(gate);
      const BatchRecord rec =
          make_batch_record(batch.embeddings(true));
      scores = rec.q_scores;
      for (std::size_t i : kept_set(rec, ag.tau_hat)) kept[i] = true;
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out << batch.query_id << "," << batch.responses[i].response_id << ","
          << format_double(scores[i]) << "," << (kept[i] ? 1 : 0) << "\n";
    }
  }
  return 0;
}

int cmd_align(const CommonFlags& flags, double alpha, double tail_q,
              double delta, const std::string& predicate_name,
              std::string profile_path) {
  const BatchDataset dataset = load_jsonl(flags.input, !flags.no_normalize);
  if (dataset.size() < 1) throw EmptyInput("dataset has no batches");

  PredicateSpec spec;
  spec.kind = predicate_kind_from_string(predicate_name);
  spec.tail_q = tail_q;
  spec.delta = delta;

  std::vector<double> s_values;
  std::vector<StrictnessProfile> profiles;
  for (const Batch& batch : dataset.batches) {
    const BatchRecord rec = make_batch_record(
        batch.embeddings(true), batch.severities());
    TauPredicate pred;
    if (spec.kind == PredicateKind::cvar_gap) {
      pred = [&rec, &spec](double tau) {
        return cvar_gap_predicate(rec, tau, spec.tail_q, spec.delta);
      };
    } else {
      pred = [&rec, &spec](double tau) {
        return median_gap_predicate(rec, tau, spec.delta);
      };
    }
    profiles.push_back(minimal_strictness(rec, pred));
    s_values.push_back(profiles.back().minimal_passing);
    if (profiles.back().monotone_violations > 0) {
      std::cerr << "warning: batch " << batch.query_id << " predicate flips "
                << profiles.back().monotone_violations
                << " time(s) from pass to fail as strictness grows\n";
    }
  }

  AlignmentGate gate = calibrate_tau(s_values, alpha, spec);
  gate.seed = resolve_seed(flags.seed_given, flags.seed, 0);
  save_gate(gate, flags.output);

  if (profile_path.empty()) profile_path = flags.output + ".profiles.csv";
  auto out = open_output(profile_path);
  RunConfig config;
  config.set("command", "align");
  config.set("input", flags.input);
  config.set("output", flags.output);
  config.set("alpha", alpha);
  config.set("tail_q", tail_q);
  config.set("delta", delta);
  config.set("predicate", to_string(spec.kind));
  config.set("tau_hat", gate.tau_hat);
  for (const auto& [key, value] : config.entries) {
    out << "# " << key << "=" << value << "\n";
  }
  out << "query_id,s_min,monotone_violations\n";
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    out << dataset.batches[j].query_id << ","
        << format_double(profiles[j].minimal_passing) << ","
        << profiles[j].monotone_violations << "\n";
  }
  return 0;
}

int cmd_simulate(const CommonFlags& flags, const GeneratorConfig& gen,
                 const SimulateOptions& options) {
  const std::vector<TrialReport> reports = simulate(gen, options);
  auto out = open_output(flags.output);

  RunConfig config;
  config.set("command", "simulate");
  config.set("experiment", std::to_string(options.experiment));
  std::string alphas_str;
  for (double a : options.alphas) {
    if (!alphas_str.empty()) alphas_str += ";";
    alphas_str += format_double(a);
  }
  config.set("alphas", alphas_str);
  config.set("trials", static_cast<std::uint64_t>(options.n_trials));
  config.set("bootstrap_k", static_cast<std::uint64_t>(options.bootstrap_k));
  config.set("tail_q", options.tail_q);
  config.set("delta", options.delta);
  config.set("predicate", to_string(options.predicate));
  config.set("batches", static_cast<std::uint64_t>(gen.batches));
  config.set("batch_size", static_cast<std::uint64_t>(gen.batch_size));
  config.set("dim", static_cast<std::uint64_t>(gen.dim));
  config.set("n_clusters", static_cast<std::uint64_t>(gen.n_clusters));
  config.set("noise_frac", gen.noise_frac);
  config.set("cluster_spread", gen.cluster_spread);
  config.set("severity_weight", gen.severity_weight);
  config.set("severity_noise", gen.severity_noise);
  config.set("seed", gen.seed);
  config.set("output", flags.output);
  config.set("convention", kQuantileConvention);

  write_trial_csv(out, reports, config);
  return 0;
}

int cmd_report(const CommonFlags& flags) {
  const std::vector<TrialReportRow> rows = read_trial_csv(flags.input);
  if (flags.output.empty()) {
    write_summary(std::cout, rows);
  } else {
    auto out = open_output(flags.output);
    write_summary(out, rows);
  }
  return 0;
}

int run_cli_impl(const std::vector<std::string>& args) {
  CLI::App app{"confgate: Gram-geometry scores with conformal gating"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string method = "bbucp";
  double alpha = 0.1;
  std::vector<double> alphas;
  std::size_t bootstrap_k = 200;
  double tail_q = 0.9;
  double delta = 0.0;
  std::string predicate = "cvar_gap";
  std::string gate_path;
  std::string profile_path;
  int experiment = 1;
  std::size_t trials = 200;
  std::string preset = "default";
  GeneratorConfig gen = default_config();

  auto add_common = [&](CLI::App* sub, bool needs_output) {
    sub->add_option("--input", flags.input, "input path")->required();
    auto* out = sub->add_option("--output", flags.output, "output path");
    if (needs_output) out->required();
    sub->add_flag("--no-normalize", flags.no_normalize,
                  "trust embeddings to be unit-norm instead of normalizing");
    sub->add_option("--seed", flags.seed, "64-bit RNG seed");
  };

  CLI::App* score = app.add_subcommand("score", "per-response energy and atypicality CSV");
  add_common(score, true);

  CLI::App* calibrate = app.add_subcommand("calibrate", "calibrate a conformal gate from JSONL batches");
  add_common(calibrate, true);
  calibrate->add_option("--alpha", alpha, "miscoverage level in (0,1)");
  calibrate->add_option("--method", method, "split|full|bucp|bbucp");
  calibrate->add_option("--bootstrap-k", bootstrap_k, "bootstrap replicates per batch");

  CLI::App* gate_cmd = app.add_subcommand("gate", "apply a gate file to JSONL batches");
  add_common(gate_cmd, true);
  gate_cmd->add_option("--gate", gate_path, "gate JSON file")->required();

  CLI::App* align = app.add_subcommand("align", "calibrate a strictness gate via conformal alignment");
  add_common(align, true);
  align->add_option("--alpha", alpha, "miscoverage level in (0,1)");
  align->add_option("--tail-q", tail_q, "CVaR tail level in (0,1)");
  align->add_option("--delta", delta, "required severity-gap margin");
  align->add_option("--predicate", predicate, "cvar_gap|median_gap");
  align->add_option("--profile-output", profile_path, "per-batch S_j CSV path");

  CLI::App* sim = app.add_subcommand("simulate", "synthetic experiment harness");
  sim->add_option("--experiment", experiment, "1 (split vs bootstrap), 2 (LOQO gate), 3 (alignment)")->required();
  sim->add_option("--output", flags.output, "TrialReport CSV path")->required();
  sim->add_option("--alpha", alphas, "alpha grid")->delimiter(',');
  sim->add_option("--trials", trials, "Monte Carlo trials");
  sim->add_option("--bootstrap-k", bootstrap_k, "bootstrap replicates");
  sim->add_option("--tail-q", tail_q, "CVaR tail level");
  sim->add_option("--delta", delta, "predicate margin");
  sim->add_option("--predicate", predicate, "cvar_gap|median_gap");
  sim->add_option("--seed", flags.seed, "64-bit RNG seed");
  sim->add_option("--preset", preset, "default|heavy-tailed");
  sim->add_option("--batches", gen.batches, "batches per dataset (J+1)");
  sim->add_option("--batch-size", gen.batch_size, "responses per batch (I)");
  sim->add_option("--dim", gen.dim, "embedding dimension");
  sim->add_option("--clusters", gen.n_clusters, "consensus clusters per batch");
  sim->add_option("--noise-frac", gen.noise_frac, "outlier fraction in [0,1)");
  sim->add_option("--cluster-spread", gen.cluster_spread, "member perturbation scale");
  sim->add_option("--severity-weight", gen.severity_weight, "atypicality-to-severity weight");
  sim->add_option("--severity-noise", gen.severity_noise, "severity noise scale");

  CLI::App* report = app.add_subcommand("report", "summarize a TrialReport CSV");
  report->add_option("--input", flags.input, "TrialReport CSV")->required();
  report->add_option("--output", flags.output, "summary path (default stdout)");

  std::vector<std::string> mutable_args(args.rbegin(), args.rend());
  try {
    app.parse(mutable_args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    const int code = e.get_exit_code();
    return code == 0 ? 1 : code;
  }

  flags.seed_given = false;
  for (CLI::App* sub : {score, calibrate, gate_cmd, align, sim}) {
    if (sub->parsed() && sub->count("--seed") > 0) flags.seed_given = true;
  }

  if (score->parsed()) return cmd_score(flags);
  if (calibrate->parsed()) return cmd_calibrate(flags, method, alpha, bootstrap_k);
  if (gate_cmd->parsed()) return cmd_gate(flags, gate_path);
  if (align->parsed()) return cmd_align(flags, alpha, tail_q, delta, predicate, profile_path);
  if (sim->parsed()) {
    if (sim->count("--preset") > 0) {
      GeneratorConfig base =
          preset == "heavy-tailed" ? heavy_tailed_config() : default_config();
      if (preset != "heavy-tailed" && preset != "default") {
        throw InvalidConfig("unknown preset: " + preset);
      }
      // Explicit generator flags override the preset.
      if (sim->count("--batches") == 0) gen.batches = base.batches;
      if (sim->count("--batch-size") == 0) gen.batch_size = base.batch_size;
      if (sim->count("--dim") == 0) gen.dim = base.dim;
      if (sim->count("--clusters") == 0) gen.n_clusters = base.n_clusters;
      if (sim->count("--noise-frac") == 0) gen.noise_frac = base.noise_frac;
      if (sim->count("--cluster-spread") == 0) gen.cluster_spread = base.cluster_spread;
      if (sim->count("--severity-weight") == 0) gen.severity_weight = base.severity_weight;
      if (sim->count("--severity-noise") == 0) gen.severity_noise = base.severity_noise;
    }
    gen.seed = resolve_seed(flags.seed_given, flags.seed, gen.seed);
    SimulateOptions options;
    options.experiment = experiment;
    if (!alphas.empty()) options.alphas = alphas;
    options.n_trials = trials;
    options.bootstrap_k = bootstrap_k;
    options.tail_q = tail_q;
    options.delta = delta;
    options.predicate = predicate_kind_from_string(predicate);
    return cmd_simulate(flags, gen, options);
  }
  if (report->parsed()) return cmd_report(flags);
  throw InvalidConfig("no subcommand given");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return run_cli_impl(args);
  } catch (const Error& e) {
    emit_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}

}  // namespace confgate
