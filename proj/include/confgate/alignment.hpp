#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "confgate/geometry.hpp"

namespace confgate {

// One query's batch as the alignment layer sees it: a cheap consensus score
// per response (interaction energy rescaled into [0, 1]) and, when labels
// exist, a severity per response in [0, 1] (larger = worse).
struct BatchRecord {
  std::vector<double> q_scores;
  std::vector<double> severities;  // empty when severities are absent

  bool has_severities() const noexcept { return !severities.empty(); }
};

enum class PredicateKind { cvar_gap, median_gap, thresholded };

std::string to_string(PredicateKind kind);
PredicateKind predicate_kind_from_string(const std::string& name);

// Describes the batch predicate a strictness gate was calibrated against.
struct PredicateSpec {
  PredicateKind kind = PredicateKind::cvar_gap;
  double tail_q = 0.9;       // CVaR tail level
  double delta = 0.0;        // required gap margin
  double threshold_r = 0.0;  // target level for thresholded real curves
};

// Per-batch predicate curve over the induced strictness grid.
struct StrictnessProfile {
  std::vector<double> grid;   // {0} + unique q_scores + {1}, sorted
  std::vector<bool> pass;     // predicate value at each grid point
  double minimal_passing = 1.0;  // S_j: first passing grid point, 1 if none
  int monotone_violations = 0;   // adjacent true->false flips as tau grows
};

// Global strictness gate: keep responses with q_score > tau_hat.
struct AlignmentGate {
  double tau_hat = 1.0;
  double alpha = 0.0;
  std::size_t batches = 0;   // J: calibration batches
  std::size_t k_index = 0;   // ceil((1-alpha)(J+1))
  PredicateSpec predicate;
  std::uint64_t seed = 0;
};

struct DeployResult {
  std::vector<std::size_t> kept;
  // Present only when severities exist and both kept and dropped sets are
  // nonempty (the gaps are undefined otherwise).
  std::optional<double> delta_cvar;
  std::optional<double> delta_fs;
};

// Indices with q_score strictly above tau; complement is the dropped set.
std::vector<std::size_t> kept_set(const BatchRecord& rec, double tau);

// Empirical upper-tail CVaR: mean of the h largest values with
// h = ceil((1 - tail_q) * m); winsorizes to the maximum if h were 0.
double cvar(const std::vector<double>& values, double tail_q);

// Middle order statistic; even sizes average the two central values.
double median(std::vector<double> values);

// CVaR gap between dropped and kept severities at strictness tau; false when
// either set is empty.
bool cvar_gap_predicate(const BatchRecord& rec, double tau, double tail_q,
                        double delta);

// Median of the whole batch minus median of the kept set, tested against
// delta; false when the kept set is empty.
bool median_gap_predicate(const BatchRecord& rec, double tau, double delta);

using RealCurve = std::function<double(double)>;
using TauPredicate = std::function<bool(double)>;

// Lifts a non-decreasing right-continuous real curve into the boolean
// predicate 1{P(tau) >= r}.
TauPredicate threshold_predicate(RealCurve curve, double r);

// Scans the grid induced by the batch's unique q_scores (plus 0 and 1) and
// records the first crossing, the full pass curve, and how often the curve
// flips back to false as tau grows.
StrictnessProfile minimal_strictness(const BatchRecord& rec,
                                     const TauPredicate& predicate,
                                     const std::vector<double>& extra_grid = {});

// Conformal alignment of the strictness knob: tau_hat is the K-th smallest
// of the J per-batch minimal strictness values, K = ceil((1-alpha)(J+1)),
// with tau_hat = 1 when K = J+1.
AlignmentGate calibrate_tau(const std::vector<double>& s_values, double alpha,
                            const PredicateSpec& predicate = {});

// Applies the gate using q_scores only; reports the severity gaps when the
// record carries severities.
DeployResult deploy(const AlignmentGate& gate, const BatchRecord& rec);

// Affine map of interaction energies from [1, sqrt(n)] onto [0, 1]:
// q = (e - 1) / (sqrt(n) - 1). Rank-preserving; n = 1 maps to 0.
std::vector<double> rescale_energies(const ScoreVector& energy);

// Builds a BatchRecord from a normalized batch: rescaled energies as
// q_scores plus optional severities.
BatchRecord make_batch_record(const EmbeddingMatrix& batch,
                              std::vector<double> severities = {});

}  // namespace confgate
