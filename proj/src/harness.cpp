#include "confgate/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "confgate/conformal.hpp"
#include "confgate/errors.hpp"
#include "confgate/rng.hpp"

namespace confgate {

namespace {

// Stream ids layered on top of a trial seed. Batch generation occupies the
// low stream ids (one per batch), so auxiliary streams start far above.
constexpr std::uint64_t kShuffleStream = 0x10000001ULL;
constexpr std::uint64_t kBootstrapStream = 0x10000002ULL;

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, i);
  return buf;
}

// Draws a unit vector; gaussian direction, renormalized.
void draw_sphere(SplitMix64& rng, std::size_t dim, std::vector<double>& out) {
  double norm = 0.0;
  do {
    out.clear();
    norm = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      out.push_back(rng.next_gaussian());
      norm += out.back() * out.back();
    }
    norm = std::sqrt(norm);
  } while (norm < kZeroRowTol);
  for (double& x : out) x /= norm;
}

Batch gen_one_batch(const GeneratorConfig& cfg, std::uint64_t seed,
                    std::string query_id) {
  SplitMix64 rng(seed);
  const std::size_t i_total = cfg.batch_size;
  const std::size_t n_noise = std::min<std::size_t>(
      i_total - 1,
      static_cast<std::size_t>(std::llround(cfg.noise_frac * static_cast<double>(i_total))));
  const std::size_t n_members = i_total - n_noise;

  std::vector<std::vector<double>> directions(cfg.n_clusters);
  for (auto& dir : directions) draw_sphere(rng, cfg.dim, dir);

  std::vector<std::vector<double>> rows;
  std::vector<bool> is_noise;
  rows.reserve(i_total);
  std::vector<double> v(cfg.dim);
  for (std::size_t m = 0; m < n_members; ++m) {
    const std::size_t c =
        cfg.n_clusters == 1 ? 0 : static_cast<std::size_t>(rng.next_below(cfg.n_clusters));
    double norm = 0.0;
    for (std::size_t k = 0; k < cfg.dim; ++k) {
      v[k] = directions[c][k] + cfg.cluster_spread * rng.next_gaussian();
      norm += v[k] * v[k];
    }
    norm = std::sqrt(norm);
    if (norm < kZeroRowTol) {
      draw_sphere(rng, cfg.dim, v);
      norm = 1.0;
    }
    std::vector<double> row(cfg.dim);
    for (std::size_t k = 0; k < cfg.dim; ++k) row[k] = v[k] / norm;
    rows.push_back(std::move(row));
    is_noise.push_back(false);
  }
  for (std::size_t o = 0; o < n_noise; ++o) {
    std::vector<double> row;
    draw_sphere(rng, cfg.dim, row);
    rows.push_back(std::move(row));
    is_noise.push_back(true);
  }

  // Fisher-Yates; makes row order exchangeable within the batch.
  for (std::size_t i = i_total - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
    std::swap(rows[i], rows[j]);
    std::swap(is_noise[i], is_noise[j]);
  }

  const EmbeddingMatrix matrix = EmbeddingMatrix::from_rows(rows, true);
  const ScoreVector atypical = atypical_score(interaction_energy(gram(matrix)));

  Batch batch;
  batch.query_id = std::move(query_id);
  batch.responses.reserve(i_total);
  for (std::size_t i = 0; i < i_total; ++i) {
    Response resp;
    resp.response_id = batch.query_id + "_" + padded_id("r", i);
    resp.embedding = rows[i];
    const double s = cfg.severity_weight * atypical.values[i] +
                     cfg.severity_noise * rng.next_gaussian();
    resp.severity = std::min(1.0, std::max(0.0, s));
    resp.text = is_noise[i] ? "noise" : "cluster";
    batch.responses.push_back(std::move(resp));
  }
  return batch;
}

TauPredicate bind_predicate(const BatchRecord& rec, const PredicateSpec& spec) {
  switch (spec.kind) {
    case PredicateKind::cvar_gap:
      return [&rec, spec](double tau) {
        return cvar_gap_predicate(rec, tau, spec.tail_q, spec.delta);
      };
    case PredicateKind::median_gap:
      return [&rec, spec](double tau) {
        return median_gap_predicate(rec, tau, spec.delta);
      };
    case PredicateKind::thresholded:
      throw InvalidConfig(
          "thresholded predicates wrap a real curve; use threshold_predicate");
  }
  throw InvalidConfig("unknown predicate kind");
}

struct FoldStats {
  double q = 0.0;
  double coverage = 0.0;
  double delta_fs = 0.0;
};

struct DatasetView {
  std::vector<ResidualBag> bags;
  std::vector<std::vector<double>> severities;
};

DatasetView residual_view(const BatchDataset& dataset, bool need_severities) {
  DatasetView view;
  view.bags.reserve(dataset.size());
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    const Batch& batch = dataset.batches[j];
    view.bags.push_back(
        loo_residuals(batch.embeddings(true), static_cast<int>(j)));
    if (view.bags.back().size() != view.bags.front().size()) {
      throw InconsistentBatchSizes(view.bags.front().size(),
                                   view.bags.back().size());
    }
    if (need_severities) view.severities.push_back(batch.severities());
  }
  return view;
}

// dFS of a gated batch: median(excluded) - median(kept), 0 when one side is
// empty.
double gated_delta_fs(const std::vector<double>& residuals,
                      const std::vector<double>& severities, double q) {
  std::vector<double> kept, excluded;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    (residuals[i] <= q ? kept : excluded).push_back(severities[i]);
  }
  if (kept.empty() || excluded.empty()) return 0.0;
  return median(excluded) - median(kept);
}

// One experiment-2 fold at every alpha.
std::vector<FoldStats> exp2_fold(const DatasetView& view, std::size_t held,
                                 const std::vector<double>& alphas,
                                 std::size_t bootstrap_k, std::uint64_t fold_seed,
                                 Exp2Threshold mode) {
  std::vector<ResidualBag> calib;
  calib.reserve(view.bags.size() - 1);
  for (std::size_t j = 0; j < view.bags.size(); ++j) {
    if (j != held) calib.push_back(view.bags[j]);
  }
  const ResidualBag& held_bag = view.bags[held];
  const std::vector<double>& held_sev = view.severities[held];

  std::vector<double> thresholds(alphas.size(), 0.0);
  if (mode == Exp2Threshold::proved) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      thresholds[a] = bbucp(calib, alphas[a], bootstrap_k, fold_seed).q;
    }
  } else {
    // Aggregated variant: mean of per-batch bootstrapped (1-alpha)-quantiles;
    // no finite-sample guarantee (it undercovers on small pools).
    SplitMix64 rng(fold_seed);
    const std::size_t i_size = calib.front().size();
    std::vector<double> resample(i_size);
    std::size_t count = 0;
    for (const ResidualBag& bag : calib) {
      for (std::size_t r = 0; r < bootstrap_k; ++r) {
        for (std::size_t i = 0; i < i_size; ++i) {
          resample[i] = bag.values[rng.next_below(i_size)];
        }
        std::sort(resample.begin(), resample.end());
        ++count;
        for (std::size_t a = 0; a < alphas.size(); ++a) {
          const std::size_t k = std::min(
              i_size, ceil_index((1.0 - alphas[a]) * static_cast<double>(i_size)));
          thresholds[a] += resample[k - 1];
        }
      }
    }
    for (double& t : thresholds) t /= static_cast<double>(count);
  }

  std::vector<FoldStats> out(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    FoldStats& fs = out[a];
    fs.q = thresholds[a];
    std::size_t covered = 0;
    for (double r : held_bag.values) covered += (r <= fs.q);
    fs.coverage = static_cast<double>(covered) /
                  static_cast<double>(held_bag.size());
    fs.delta_fs = gated_delta_fs(held_bag.values, held_sev, fs.q);
  }
  return out;
}

std::vector<TrialReport> aggregate_exp2(
    const std::vector<double>& alphas,
    const std::vector<std::vector<FoldStats>>& per_alpha_folds,
    const std::string& method, std::uint64_t seed) {
  std::vector<TrialReport> reports;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const auto& folds = per_alpha_folds[a];
    std::vector<double> cov, q, dfs;
    for (const FoldStats& f : folds) {
      cov.push_back(f.coverage);
      q.push_back(f.q);
      dfs.push_back(f.delta_fs);
    }
    TrialReport rep;
    rep.method = method;
    rep.alpha = alphas[a];
    rep.proportion_metric = "coverage";
    rep.proportion = mean_of(cov);
    rep.se = binomial_se(rep.proportion, folds.size());
    rep.mean_threshold = mean_of(q);
    rep.delta_fs_median = mean_of(dfs);
    rep.n_trials = folds.size();
    rep.seed = seed;
    reports.push_back(std::move(rep));
  }
  return reports;
}

struct AlignFold {
  bool pass = false;
  double tau_hat = 1.0;
  double delta_cvar = 0.0;
  double delta_fs = 0.0;
};

// One alignment fold at every alpha. Profiles are precomputed by the caller
// since they do not depend on alpha.
std::vector<AlignFold> exp3_fold(const std::vector<BatchRecord>& records,
                                 const std::vector<double>& s_values,
                                 std::size_t held,
                                 const std::vector<double>& alphas,
                                 const PredicateSpec& spec) {
  std::vector<double> calib_s;
  calib_s.reserve(s_values.size() - 1);
  for (std::size_t j = 0; j < s_values.size(); ++j) {
    if (j != held) calib_s.push_back(s_values[j]);
  }
  const BatchRecord& held_rec = records[held];
  const TauPredicate held_pred = bind_predicate(held_rec, spec);

  std::vector<AlignFold> out(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    AlignFold& fold = out[a];
    const AlignmentGate gate = calibrate_tau(calib_s, alphas[a], spec);
    fold.tau_hat = gate.tau_hat;
    fold.pass = held_pred(gate.tau_hat);
    const DeployResult deployed = deploy(gate, held_rec);
    fold.delta_cvar = deployed.delta_cvar.value_or(0.0);
    fold.delta_fs = deployed.delta_fs.value_or(0.0);
  }
  return out;
}

std::vector<TrialReport> aggregate_exp3(
    const std::vector<double>& alphas,
    const std::vector<std::vector<AlignFold>>& per_alpha_folds,
    const PredicateSpec& spec, std::uint64_t seed) {
  std::vector<TrialReport> reports;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const auto& folds = per_alpha_folds[a];
    std::vector<double> tau, dcv, dfs;
    std::size_t passed = 0;
    for (const AlignFold& f : folds) {
      passed += f.pass;
      tau.push_back(f.tau_hat);
      dcv.push_back(f.delta_cvar);
      dfs.push_back(f.delta_fs);
    }
    TrialReport rep;
    rep.method = "align-" + to_string(spec.kind);
    rep.alpha = alphas[a];
    rep.proportion_metric = "pass_rate";
    rep.proportion =
        folds.empty() ? 0.0
                      : static_cast<double>(passed) / static_cast<double>(folds.size());
    rep.se = binomial_se(rep.proportion, folds.size());
    rep.mean_threshold = mean_of(tau);
    rep.delta_cvar = mean_of(dcv);
    rep.delta_fs_median = mean_of(dfs);
    rep.n_trials = folds.size();
    rep.seed = seed;
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::vector<double> strictness_values(const std::vector<BatchRecord>& records,
                                      const PredicateSpec& spec) {
  std::vector<double> s;
  s.reserve(records.size());
  for (const BatchRecord& rec : records) {
    s.push_back(minimal_strictness(rec, bind_predicate(rec, spec)).minimal_passing);
  }
  return s;
}

std::vector<BatchRecord> dataset_records(const BatchDataset& dataset) {
  std::vector<BatchRecord> records;
  records.reserve(dataset.size());
  for (const Batch& batch : dataset.batches) {
    records.push_back(make_batch_record(batch.embeddings(true), batch.severities()));
  }
  return records;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (batches == 0) throw InvalidConfig("batches must be >= 1");
  if (batch_size < 2) throw InvalidConfig("batch_size must be >= 2");
  if (dim == 0) throw InvalidConfig("dim must be >= 1");
  if (n_clusters == 0) throw InvalidConfig("n_clusters must be >= 1");
  if (noise_frac < 0.0 || noise_frac >= 1.0) {
    throw InvalidConfig("noise_frac must lie in [0, 1)");
  }
  if (cluster_spread < 0.0) throw InvalidConfig("cluster_spread must be >= 0");
  if (severity_noise < 0.0) throw InvalidConfig("severity_noise must be >= 0");
  if (severity_weight < 0.0) throw InvalidConfig("severity_weight must be >= 0");
}

GeneratorConfig default_config() { return GeneratorConfig{}; }

GeneratorConfig heavy_tailed_config() {
  GeneratorConfig cfg;
  cfg.batches = 50;
  cfg.batch_size = 100;
  cfg.dim = 8;
  cfg.n_clusters = 1;
  cfg.noise_frac = 0.08;
  cfg.cluster_spread = 0.6;
  return cfg;
}

BatchDataset gen_batches(const GeneratorConfig& cfg) {
  cfg.validate();
  BatchDataset dataset;
  dataset.normalized = true;
  dataset.batches.reserve(cfg.batches);
  for (std::size_t j = 0; j < cfg.batches; ++j) {
    dataset.batches.push_back(
        gen_one_batch(cfg, derive_seed(cfg.seed, j), padded_id("q", j)));
  }
  return dataset;
}

double binomial_se(double p, std::size_t n_trials) {
  if (n_trials == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n_trials));
}

std::vector<std::vector<Exp1Trial>> experiment1_trials(
    const GeneratorConfig& cfg, const std::vector<double>& alphas,
    std::size_t n_reps, const Exp1Options& options) {
  cfg.validate();
  if (alphas.empty()) throw InvalidConfig("need at least one alpha");
  if (options.bootstrap_k == 0) throw InvalidConfig("bootstrap_k must be >= 1");
  if (options.split_frac <= 0.0 || options.split_frac >= 1.0) {
    throw InvalidConfig("split_frac must lie in (0, 1)");
  }

  const std::size_t pool = cfg.batch_size;
  std::size_t n_cal = static_cast<std::size_t>(
      std::llround(options.split_frac * static_cast<double>(pool)));
  n_cal = std::min<std::size_t>(pool - 1, std::max<std::size_t>(1, n_cal));

  std::vector<std::vector<Exp1Trial>> trials(
      alphas.size(), std::vector<Exp1Trial>(n_reps));

  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, rep);
    const Batch batch = gen_one_batch(cfg, rep_seed, padded_id("pool", rep));
    const ResidualBag all = loo_residuals(batch.embeddings(true));

    std::vector<std::size_t> order(pool);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 shuffle_rng(derive_seed(rep_seed, kShuffleStream));
    for (std::size_t i = pool - 1; i > 0; --i) {
      std::swap(order[i],
                order[static_cast<std::size_t>(shuffle_rng.next_below(i + 1))]);
    }

    ResidualBag calib;
    calib.base_size = all.base_size;
    std::vector<double> test;
    for (std::size_t i = 0; i < pool; ++i) {
      if (i < n_cal) {
        calib.values.push_back(all.values[order[i]]);
        calib.batch_ids.push_back(0);
      } else {
        test.push_back(all.values[order[i]]);
      }
    }

    // One sorted resample serves every alpha; aggregation is either the mean
    // of per-resample order statistics or one order statistic of the pooled
    // resampled values. The two coincide exactly at K = 1.
    SplitMix64 boot_rng(derive_seed(rep_seed, kBootstrapStream));
    std::vector<double> quantile_sums(alphas.size(), 0.0);
    std::vector<double> pooled;
    if (options.aggregation == BbAggregation::pooled) {
      pooled.reserve(options.bootstrap_k * n_cal);
    }
    std::vector<double> resample(n_cal);
    for (std::size_t r = 0; r < options.bootstrap_k; ++r) {
      for (std::size_t i = 0; i < n_cal; ++i) {
        resample[i] = calib.values[boot_rng.next_below(n_cal)];
      }
      std::sort(resample.begin(), resample.end());
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        const std::size_t k = std::min(
            n_cal, ceil_index((1.0 - alphas[a]) * static_cast<double>(n_cal)));
        quantile_sums[a] += resample[k - 1];
      }
      if (options.aggregation == BbAggregation::pooled) {
        pooled.insert(pooled.end(), resample.begin(), resample.end());
      }
    }

    for (std::size_t a = 0; a < alphas.size(); ++a) {
      Exp1Trial& t = trials[a][rep];
      t.q_split = split_ucp(calib, alphas[a]).q;
      if (options.aggregation == BbAggregation::mean_of_quantiles) {
        t.q_bb = quantile_sums[a] / static_cast<double>(options.bootstrap_k);
      } else {
        std::vector<double> copy = pooled;
        const std::size_t k = std::min(
            copy.size(),
            ceil_index((1.0 - alphas[a]) * static_cast<double>(copy.size())));
        std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end());
        t.q_bb = copy[k - 1];
      }
      std::size_t cs = 0, cb = 0;
      for (double r : test) {
        cs += (r <= t.q_split);
        cb += (r <= t.q_bb);
      }
      t.cov_split = static_cast<double>(cs) / static_cast<double>(test.size());
      t.cov_bb = static_cast<double>(cb) / static_cast<double>(test.size());
    }
  }
  return trials;
}

std::vector<TrialReport> experiment1(const GeneratorConfig& cfg,
                                     const std::vector<double>& alphas,
                                     std::size_t n_reps,
                                     const Exp1Options& options) {
  const auto trials = experiment1_trials(cfg, alphas, n_reps, options);
  std::vector<TrialReport> reports;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    std::vector<double> cov_s, cov_b, q_s, q_b;
    for (const Exp1Trial& t : trials[a]) {
      cov_s.push_back(t.cov_split);
      cov_b.push_back(t.cov_bb);
      q_s.push_back(t.q_split);
      q_b.push_back(t.q_bb);
    }
    TrialReport split_rep;
    split_rep.method = "split";
    split_rep.alpha = alphas[a];
    split_rep.proportion_metric = "coverage";
    split_rep.proportion = mean_of(cov_s);
    split_rep.se = binomial_se(split_rep.proportion, n_reps);
    split_rep.mean_threshold = mean_of(q_s);
    split_rep.n_trials = n_reps;
    split_rep.seed = cfg.seed;
    reports.push_back(split_rep);

    TrialReport bb_rep = split_rep;
    bb_rep.method = "bb";
    bb_rep.proportion = mean_of(cov_b);
    bb_rep.se = binomial_se(bb_rep.proportion, n_reps);
    bb_rep.mean_threshold = mean_of(q_b);
    reports.push_back(bb_rep);
  }
  return reports;
}

std::vector<TrialReport> experiment2_loqo(const BatchDataset& dataset,
                                          const std::vector<double>& alphas,
                                          std::size_t bootstrap_k,
                                          std::uint64_t seed,
                                          Exp2Threshold mode) {
  if (dataset.size() < 3) throw TooFewBatches(dataset.size(), 3);
  const DatasetView view = residual_view(dataset, true);

  std::vector<std::vector<FoldStats>> per_alpha(alphas.size());
  for (std::size_t f = 0; f < view.bags.size(); ++f) {
    const auto folds =
        exp2_fold(view, f, alphas, bootstrap_k, derive_seed(seed, f), mode);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      per_alpha[a].push_back(folds[a]);
    }
  }
  const std::string method =
      mode == Exp2Threshold::proved ? "bbucp" : "bbucp-agg";
  return aggregate_exp2(alphas, per_alpha, method, seed);
}

std::vector<TrialReport> experiment3_alignment(const BatchDataset& dataset,
                                               const std::vector<double>& alphas,
                                               double tail_q, double delta,
                                               PredicateKind kind,
                                               std::uint64_t seed) {
  if (dataset.size() < 3) throw TooFewBatches(dataset.size(), 3);
  PredicateSpec spec;
  spec.kind = kind;
  spec.tail_q = tail_q;
  spec.delta = delta;

  const std::vector<BatchRecord> records = dataset_records(dataset);
  const std::vector<double> s_values = strictness_values(records, spec);

  std::vector<std::vector<AlignFold>> per_alpha(alphas.size());
  for (std::size_t f = 0; f < records.size(); ++f) {
    const auto folds = exp3_fold(records, s_values, f, alphas, spec);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      per_alpha[a].push_back(folds[a]);
    }
  }
  return aggregate_exp3(alphas, per_alpha, spec, seed);
}

std::vector<TrialReport> coverage_mc(const GeneratorConfig& cfg,
                                     const std::vector<double>& alphas,
                                     std::size_t n_trials,
                                     std::size_t bootstrap_k) {
  cfg.validate();
  if (cfg.batches < 2) throw InvalidConfig("coverage_mc needs >= 2 batches per dataset");
  std::vector<std::vector<double>> q_bucp(alphas.size()), q_bbucp(alphas.size());
  std::vector<std::size_t> hit_bucp(alphas.size(), 0), hit_bbucp(alphas.size(), 0);

  GeneratorConfig trial_cfg = cfg;
  for (std::size_t t = 0; t < n_trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, t);
    trial_cfg.seed = trial_seed;
    const BatchDataset dataset = gen_batches(trial_cfg);

    std::vector<ResidualBag> calib;
    calib.reserve(dataset.size() - 1);
    for (std::size_t j = 0; j + 1 < dataset.size(); ++j) {
      calib.push_back(
          loo_residuals(dataset.batches[j].embeddings(true), static_cast<int>(j)));
    }
    const ResidualBag held =
        loo_residuals(dataset.batches.back().embeddings(true));
    const double event_residual = held.values.back();

    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const CalibratedGate gb = bucp(calib, alphas[a]);
      const CalibratedGate gbb = bbucp(calib, alphas[a], bootstrap_k,
                                       derive_seed(trial_seed, kBootstrapStream));
      q_bucp[a].push_back(gb.q);
      q_bbucp[a].push_back(gbb.q);
      hit_bucp[a] += apply_gate(gb, event_residual);
      hit_bbucp[a] += apply_gate(gbb, event_residual);
    }
  }

  std::vector<TrialReport> reports;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    TrialReport rep;
    rep.alpha = alphas[a];
    rep.proportion_metric = "coverage";
    rep.n_trials = n_trials;
    rep.seed = cfg.seed;

    rep.method = "bucp";
    rep.proportion = static_cast<double>(hit_bucp[a]) / static_cast<double>(n_trials);
    rep.se = binomial_se(rep.proportion, n_trials);
    rep.mean_threshold = mean_of(q_bucp[a]);
    reports.push_back(rep);

    rep.method = "bbucp";
    rep.proportion = static_cast<double>(hit_bbucp[a]) / static_cast<double>(n_trials);
    rep.se = binomial_se(rep.proportion, n_trials);
    rep.mean_threshold = mean_of(q_bbucp[a]);
    reports.push_back(rep);
  }
  return reports;
}

std::vector<TrialReport> loqo_mc(const GeneratorConfig& cfg,
                                 const std::vector<double>& alphas,
                                 std::size_t n_trials, std::size_t bootstrap_k,
                                 Exp2Threshold mode) {
  cfg.validate();
  if (cfg.batches < 3) throw InvalidConfig("loqo_mc needs >= 3 batches per dataset");
  std::vector<std::vector<FoldStats>> per_alpha(alphas.size());

  GeneratorConfig trial_cfg = cfg;
  std::size_t collected = 0;
  for (std::size_t d = 0; collected < n_trials; ++d) {
    const std::uint64_t dataset_seed = derive_seed(cfg.seed, d);
    trial_cfg.seed = dataset_seed;
    const BatchDataset dataset = gen_batches(trial_cfg);
    const DatasetView view = residual_view(dataset, true);
    for (std::size_t f = 0; f < view.bags.size() && collected < n_trials; ++f) {
      const auto folds = exp2_fold(view, f, alphas, bootstrap_k,
                                   derive_seed(dataset_seed, kBootstrapStream + f),
                                   mode);
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        per_alpha[a].push_back(folds[a]);
      }
      ++collected;
    }
  }
  const std::string method =
      mode == Exp2Threshold::proved ? "bbucp" : "bbucp-agg";
  return aggregate_exp2(alphas, per_alpha, method, cfg.seed);
}

std::vector<TrialReport> alignment_mc(const GeneratorConfig& cfg,
                                      const std::vector<double>& alphas,
                                      std::size_t n_trials,
                                      const PredicateSpec& predicate) {
  cfg.validate();
  if (cfg.batches < 2) throw InvalidConfig("alignment_mc needs >= 2 batches per dataset");
  std::vector<std::vector<AlignFold>> per_alpha(alphas.size());

  GeneratorConfig trial_cfg = cfg;
  for (std::size_t t = 0; t < n_trials; ++t) {
    trial_cfg.seed = derive_seed(cfg.seed, t);
    const BatchDataset dataset = gen_batches(trial_cfg);
    const std::vector<BatchRecord> records = dataset_records(dataset);
    const std::vector<double> s_values = strictness_values(records, predicate);
    const auto folds =
        exp3_fold(records, s_values, records.size() - 1, alphas, predicate);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      per_alpha[a].push_back(folds[a]);
    }
  }
  return aggregate_exp3(alphas, per_alpha, predicate, cfg.seed);
}

std::vector<TrialReport> simulate(const GeneratorConfig& cfg,
                                  const SimulateOptions& options) {
  switch (options.experiment) {
    case 1: {
      Exp1Options exp1;
      exp1.bootstrap_k = options.bootstrap_k;
      return experiment1(cfg, options.alphas, options.n_trials, exp1);
    }
    case 2:
      return loqo_mc(cfg, options.alphas, options.n_trials, options.bootstrap_k);
    case 3: {
      PredicateSpec spec;
      spec.kind = options.predicate;
      spec.tail_q = options.tail_q;
      spec.delta = options.delta;
      return alignment_mc(cfg, options.alphas, options.n_trials, spec);
    }
    default:
      throw InvalidConfig("experiment id must be 1, 2 or 3");
  }
}

}  // namespace confgate
