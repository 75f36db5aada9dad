#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confgate/alignment.hpp"
#include "confgate/dataset.hpp"

namespace confgate {

// Synthetic batch generator. Each batch draws fresh cluster directions
// uniformly on the sphere, fills (1 - noise_frac) of the rows with
// renormalized direction + spread * gaussian members, the rest with isotropic
// outliers, shuffles the rows, and assigns severity =
// clamp(severity_weight * atypicality + severity_noise * gaussian, 0, 1).
// Batches are i.i.d. and rows within a batch are exchangeable by construction.
struct GeneratorConfig {
  std::size_t batches = 50;     // total batches per dataset (J calib + 1 test)
  std::size_t batch_size = 20;  // I responses per batch
  std::size_t dim = 32;         // embedding dimension d
  std::size_t n_clusters = 1;
  double noise_frac = 0.15;     // fraction of isotropic outlier rows, in [0, 1)
  double cluster_spread = 0.15; // gaussian perturbation scale of members
  double severity_weight = 1.0;
  double severity_noise = 0.1;
  std::uint64_t seed = 1;

  void validate() const;  // throws InvalidConfig
};

// Desk-scale default: 49 calibration batches + 1 test, I=20, d=32.
GeneratorConfig default_config();

// Wide single-cluster pool in low dimension: residuals get a long, diffuse
// right tail, the regime where bootstrap aggregation beats the raw split
// quantile. Used as the experiment-1 pool (batch_size is the pool size).
GeneratorConfig heavy_tailed_config();

BatchDataset gen_batches(const GeneratorConfig& cfg);

// One aggregate row of a Monte Carlo run. The CSV layer flattens this into
// one line per metric.
struct TrialReport {
  std::string method;
  double alpha = 0.0;
  std::string proportion_metric = "coverage";  // or "pass_rate"
  double proportion = 0.0;
  double se = 0.0;  // binomial SE of `proportion`
  double mean_threshold = 0.0;
  std::optional<double> delta_fs_median;
  std::optional<double> delta_cvar;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
};

double binomial_se(double p, std::size_t n_trials);

// ---------------------------------------------------------------------------
// Experiment 1: single-query calibration. Each rep builds one response pool,
// computes LOO residuals within it, splits them into calibration/test halves,
// and compares the split-UCP threshold against a bootstrap-aggregated
// threshold (K resamples of the calibration bag; per resample the plain
// ceil((1-alpha)m)-th order statistic; aggregated by mean or by pooling all
// resampled values before taking one order statistic).
// ---------------------------------------------------------------------------

enum class BbAggregation { mean_of_quantiles, pooled };

struct Exp1Options {
  std::size_t bootstrap_k = 200;
  double split_frac = 0.5;
  BbAggregation aggregation = BbAggregation::mean_of_quantiles;
};

struct Exp1Trial {
  double q_split = 0.0;
  double q_bb = 0.0;
  double cov_split = 0.0;
  double cov_bb = 0.0;
};

// trials[a][rep] corresponds to alphas[a].
std::vector<std::vector<Exp1Trial>> experiment1_trials(
    const GeneratorConfig& cfg, const std::vector<double>& alphas,
    std::size_t n_reps, const Exp1Options& options = {});

std::vector<TrialReport> experiment1(const GeneratorConfig& cfg,
                                     const std::vector<double>& alphas,
                                     std::size_t n_reps,
                                     const Exp1Options& options = {});

// ---------------------------------------------------------------------------
// Experiment 2: leave-one-query-out cross-validation of a global BB-UCP gate,
// measuring held-out coverage and the factuality lift dFS = median(excluded
// severities) - median(kept severities) (0 when either side is empty).
// `proved` calibrates with the adjusted-quantile bbucp; `aggregated` pools
// per-batch bootstrapped (1-alpha)-quantiles into a mean threshold, the
// variant without a finite-sample guarantee (it undercovers on small pools).
// ---------------------------------------------------------------------------

enum class Exp2Threshold { proved, aggregated };

std::vector<TrialReport> experiment2_loqo(
    const BatchDataset& dataset, const std::vector<double>& alphas,
    std::size_t bootstrap_k, std::uint64_t seed,
    Exp2Threshold mode = Exp2Threshold::proved);

// ---------------------------------------------------------------------------
// Experiment 3: LOQO conformal alignment. Per fold, computes each calibration
// batch's minimal passing strictness, calibrates tau_hat, deploys on the
// held-out batch using q_scores only, and scores the predicate with the
// held-out severities.
// ---------------------------------------------------------------------------

std::vector<TrialReport> experiment3_alignment(const BatchDataset& dataset,
                                               const std::vector<double>& alphas,
                                               double tail_q, double delta,
                                               PredicateKind kind = PredicateKind::cvar_gap,
                                               std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Monte Carlo wrappers over freshly generated datasets (trial t uses the
// dataset seeded with derive_seed(cfg.seed, t), so trials are independent).
// ---------------------------------------------------------------------------

// B-UCP and BB-UCP coverage of the held-out batch's last LOO residual.
std::vector<TrialReport> coverage_mc(const GeneratorConfig& cfg,
                                     const std::vector<double>& alphas,
                                     std::size_t n_trials,
                                     std::size_t bootstrap_k);

// Experiment-2 folds accumulated across fresh datasets until n_trials folds.
std::vector<TrialReport> loqo_mc(const GeneratorConfig& cfg,
                                 const std::vector<double>& alphas,
                                 std::size_t n_trials, std::size_t bootstrap_k,
                                 Exp2Threshold mode = Exp2Threshold::proved);

// Experiment-3 with one fold per fresh dataset (hold out the last batch).
std::vector<TrialReport> alignment_mc(const GeneratorConfig& cfg,
                                      const std::vector<double>& alphas,
                                      std::size_t n_trials,
                                      const PredicateSpec& predicate);

// CLI entry: experiment id 1, 2 or 3.
struct SimulateOptions {
  int experiment = 1;
  std::vector<double> alphas = {0.05, 0.1, 0.15, 0.2};
  std::size_t n_trials = 200;
  std::size_t bootstrap_k = 200;
  double tail_q = 0.9;
  double delta = 0.0;
  PredicateKind predicate = PredicateKind::cvar_gap;
};

std::vector<TrialReport> simulate(const GeneratorConfig& cfg,
                                  const SimulateOptions& options);

}  // namespace confgate
