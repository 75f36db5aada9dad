#include "confgate/alignment.hpp"

#include <algorithm>
#include <cmath>

#include "confgate/conformal.hpp"
#include "confgate/errors.hpp"

namespace confgate {

namespace {

std::vector<double> values_at(const std::vector<double>& severities,
                              const std::vector<std::size_t>& indices) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(severities[i]);
  return out;
}

std::vector<std::size_t> dropped_set(const BatchRecord& rec, double tau) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rec.q_scores.size(); ++i) {
    if (rec.q_scores[i] <= tau) out.push_back(i);
  }
  return out;
}

void check_severities(const BatchRecord& rec, const char* op) {
  if (!rec.has_severities()) {
    throw EmptyInput(std::string(op) + " requires severities");
  }
  if (rec.severities.size() != rec.q_scores.size()) {
    throw DimensionMismatch("q_scores and severities differ in length");
  }
}

}  // namespace

std::string to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::cvar_gap: return "cvar_gap";
    case PredicateKind::median_gap: return "median_gap";
    case PredicateKind::thresholded: return "thresholded";
  }
  return "unknown";
}

PredicateKind predicate_kind_from_string(const std::string& name) {
  if (name == "cvar_gap" || name == "cvar") return PredicateKind::cvar_gap;
  if (name == "median_gap" || name == "median") return PredicateKind::median_gap;
  if (name == "thresholded") return PredicateKind::thresholded;
  throw InvalidConfig("unknown predicate kind: " + name);
}

std::vector<std::size_t> kept_set(const BatchRecord& rec, double tau) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rec.q_scores.size(); ++i) {
    if (rec.q_scores[i] > tau) out.push_back(i);
  }
  return out;
}

double cvar(const std::vector<double>& values, double tail_q) {
  if (values.empty()) throw EmptySet("cvar of an empty set");
  if (tail_q < 0.0 || tail_q >= 1.0) {
    throw InvalidConfig("cvar tail level must lie in [0, 1)");
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const std::size_t m = sorted.size();
  std::size_t h = ceil_index((1.0 - tail_q) * static_cast<double>(m));
  if (h > m) h = m;
  if (h == 0) return sorted.front();  // winsorize; unreachable for tail_q < 1
  double s = 0.0;
  for (std::size_t i = 0; i < h; ++i) s += sorted[i];
  return s / static_cast<double>(h);
}

double median(std::vector<double> values) {
  if (values.empty()) throw EmptySet("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  if (m % 2 == 1) return values[m / 2];
  return 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

bool cvar_gap_predicate(const BatchRecord& rec, double tau, double tail_q,
                        double delta) {
  check_severities(rec, "cvar_gap_predicate");
  const auto kept = kept_set(rec, tau);
  const auto dropped = dropped_set(rec, tau);
  if (kept.empty() || dropped.empty()) return false;
  const double gap = cvar(values_at(rec.severities, dropped), tail_q) -
                     cvar(values_at(rec.severities, kept), tail_q);
  return gap >= delta;
}

bool median_gap_predicate(const BatchRecord& rec, double tau, double delta) {
  check_severities(rec, "median_gap_predicate");
  const auto kept = kept_set(rec, tau);
  if (kept.empty()) return false;
  const double gap =
      median(rec.severities) - median(values_at(rec.severities, kept));
  return gap >= delta;
}

TauPredicate threshold_predicate(RealCurve curve, double r) {
  return [curve = std::move(curve), r](double tau) { return curve(tau) >= r; };
}

StrictnessProfile minimal_strictness(const BatchRecord& rec,
                                     const TauPredicate& predicate,
                                     const std::vector<double>& extra_grid) {
  StrictnessProfile profile;
  profile.grid.reserve(rec.q_scores.size() + extra_grid.size() + 2);
  profile.grid.push_back(0.0);
  profile.grid.push_back(1.0);
  profile.grid.insert(profile.grid.end(), rec.q_scores.begin(), rec.q_scores.end());
  profile.grid.insert(profile.grid.end(), extra_grid.begin(), extra_grid.end());
  std::sort(profile.grid.begin(), profile.grid.end());
  profile.grid.erase(std::unique(profile.grid.begin(), profile.grid.end()),
                     profile.grid.end());

  profile.pass.reserve(profile.grid.size());
  bool found = false;
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    const bool p = predicate(profile.grid[i]);
    profile.pass.push_back(p);
    if (p && !found) {
      profile.minimal_passing = profile.grid[i];
      found = true;
    }
    if (i > 0 && profile.pass[i - 1] && !p) ++profile.monotone_violations;
  }
  if (!found) profile.minimal_passing = 1.0;
  return profile;
}

AlignmentGate calibrate_tau(const std::vector<double>& s_values, double alpha,
                            const PredicateSpec& predicate) {
  if (s_values.empty()) throw EmptyInput("calibrate_tau needs at least one S value");
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw InvalidConfig("alpha must lie in (0, 1)");
  }
  const std::size_t j = s_values.size();
  const std::size_t k = ceil_index((1.0 - alpha) * static_cast<double>(j + 1));

  AlignmentGate gate;
  gate.alpha = alpha;
  gate.batches = j;
  gate.k_index = k;
  gate.predicate = predicate;
  if (k >= j + 1) {
    gate.tau_hat = 1.0;
  } else {
    std::vector<double> sorted = s_values;
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
    gate.tau_hat = sorted[k - 1];
  }
  return gate;
}

DeployResult deploy(const AlignmentGate& gate, const BatchRecord& rec) {
  DeployResult result;
  result.kept = kept_set(rec, gate.tau_hat);
  if (!rec.has_severities()) return result;
  check_severities(rec, "deploy");

  const auto dropped = dropped_set(rec, gate.tau_hat);
  if (result.kept.empty() || dropped.empty()) return result;
  const auto kept_sev = values_at(rec.severities, result.kept);
  const auto dropped_sev = values_at(rec.severities, dropped);
  result.delta_cvar = cvar(dropped_sev, gate.predicate.tail_q) -
                      cvar(kept_sev, gate.predicate.tail_q);
  result.delta_fs = median(dropped_sev) - median(kept_sev);
  return result;
}

std::vector<double> rescale_energies(const ScoreVector& energy) {
  if (energy.kind != ScoreKind::energy) {
    throw InvalidConfig("rescale_energies expects an energy ScoreVector");
  }
  const double denom = energy.bound - 1.0;
  std::vector<double> out;
  out.reserve(energy.values.size());
  for (double e : energy.values) {
    if (denom <= 0.0) {
      out.push_back(0.0);  // n = 1: the sole energy is 1
    } else {
      out.push_back(std::min(1.0, std::max(0.0, (e - 1.0) / denom)));
    }
  }
  return out;
}

BatchRecord make_batch_record(const EmbeddingMatrix& batch,
                              std::vector<double> severities) {
  if (!severities.empty() && severities.size() != batch.rows()) {
    throw DimensionMismatch("severity count does not match batch size");
  }
  BatchRecord rec;
  rec.q_scores = rescale_energies(interaction_energy(gram(batch)));
  rec.severities = std::move(severities);
  return rec;
}

}  // namespace confgate
