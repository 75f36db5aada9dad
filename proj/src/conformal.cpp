#include "confgate/conformal.hpp"

#include <algorithm>
#include <cmath>

#include "confgate/errors.hpp"
#include "confgate/rng.hpp"

namespace confgate {

// Levels like 1 - delta_J/J are meant to hit exact integers (8/9 * 90 = 80)
// but land an ulp high in floating point; the backward tolerance keeps the
// index from rounding up one extra order statistic.
std::size_t ceil_index(double x) {
  const double c = std::ceil(x - kIndexEps);
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

namespace {

double kth_smallest(std::vector<double> values, std::size_t k) {
  std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
  return values[k - 1];
}

// Shared pooled-bag + adjusted-quantile step of bucp/bbucp.
double adjusted_quantile(const std::vector<double>& pooled, std::size_t j,
                         double alpha) {
  const double delta_j = static_cast<double>(j + 1) * alpha - 1.0;
  if (delta_j < -kIndexEps) return kResidualBound;
  const double level =
      std::min(1.0, 1.0 - std::max(delta_j, 0.0) / static_cast<double>(j));
  const std::size_t k = std::min(pooled.size(), ceil_index(level * pooled.size()));
  return kth_smallest(pooled, k);
}

}  // namespace

std::string to_string(GateMethod method) {
  switch (method) {
    case GateMethod::split: return "split";
    case GateMethod::full: return "full";
    case GateMethod::bucp: return "bucp";
    case GateMethod::bbucp: return "bbucp";
  }
  return "unknown";
}

GateMethod gate_method_from_string(const std::string& name) {
  if (name == "split") return GateMethod::split;
  if (name == "full") return GateMethod::full;
  if (name == "bucp") return GateMethod::bucp;
  if (name == "bbucp") return GateMethod::bbucp;
  throw InvalidConfig("unknown gate method: " + name);
}

double quantile(const ResidualBag& bag, double level) {
  if (bag.empty()) throw EmptyBag();
  if (level <= 0.0 || level > 1.0) {
    throw InvalidConfig("quantile level must lie in (0, 1]");
  }
  const std::size_t m = bag.size();
  const std::size_t k = std::min(m, ceil_index(level * static_cast<double>(m)));
  return kth_smallest(bag.values, k);
}

CalibratedGate split_ucp(const ResidualBag& calib, double alpha) {
  if (calib.empty()) throw EmptyBag("split calibration bag is empty");
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw InvalidConfig("alpha must lie in (0, 1)");
  }
  const std::size_t m = calib.size();
  const std::size_t k = ceil_index((1.0 - alpha) * static_cast<double>(m + 1));

  CalibratedGate gate;
  gate.method = GateMethod::split;
  gate.alpha = alpha;
  gate.batches = 1;
  gate.batch_size = m;
  gate.q = (k > m) ? kResidualBound : kth_smallest(calib.values, k);
  return gate;
}

double full_ucp_pvalue(const ResidualBag& pool, double candidate_residual) {
  const std::size_t n = pool.size();
  std::size_t count = 1;  // the candidate itself
  for (double r : pool.values) {
    if (r >= candidate_residual) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(n + 1);
}

CalibratedGate full_ucp_gate(const ResidualBag& pool, double alpha) {
  if (pool.empty()) throw EmptyBag("full-UCP pool is empty");
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw InvalidConfig("alpha must lie in (0, 1)");
  }
  const std::size_t n = pool.size();

  CalibratedGate gate;
  gate.method = GateMethod::full;
  gate.alpha = alpha;
  gate.batches = 1;
  gate.batch_size = n;

  // Accept y iff #{r >= phi(y)} >= alpha(n+1) - 1; the largest accepted score
  // is the c-th largest pool residual with c = ceil(alpha(n+1) - 1).
  const double need = alpha * static_cast<double>(n + 1) - 1.0;
  if (need <= kIndexEps) {
    gate.q = kResidualBound;
    return gate;
  }
  const std::size_t c = ceil_index(need);
  gate.q = kth_smallest(pool.values, n - c + 1);
  return gate;
}

CalibratedGate bucp(const std::vector<ResidualBag>& batch_residuals,
                    double alpha) {
  if (batch_residuals.empty()) throw EmptyBag("no calibration bags");
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw InvalidConfig("alpha must lie in (0, 1)");
  }
  const std::size_t i = batch_residuals.front().size();
  if (i == 0) throw EmptyBag("calibration bag 0 is empty");

  std::vector<double> pooled;
  pooled.reserve(batch_residuals.size() * i);
  for (const ResidualBag& bag : batch_residuals) {
    if (bag.size() != i) throw InconsistentBatchSizes(i, bag.size());
    pooled.insert(pooled.end(), bag.values.begin(), bag.values.end());
  }

  CalibratedGate gate;
  gate.method = GateMethod::bucp;
  gate.alpha = alpha;
  gate.batches = batch_residuals.size();
  gate.batch_size = i;
  gate.q = adjusted_quantile(pooled, batch_residuals.size(), alpha);
  return gate;
}

ResidualBag bootstrap_batch(const ResidualBag& bag, std::size_t k,
                            std::uint64_t seed) {
  if (bag.empty()) throw EmptyBag("cannot bootstrap an empty bag");
  if (k == 0) {
    throw InvalidConfig("bootstrap replicate count K must be >= 1 (K=0 means plain B-UCP)");
  }
  ResidualBag out;
  out.base_size = bag.base_size;
  out.values.reserve(k);
  out.batch_ids.reserve(k);
  SplitMix64 rng(seed);
  const std::size_t m = bag.size();
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t idx = static_cast<std::size_t>(rng.next_below(m));
    out.values.push_back(bag.values[idx]);
    out.batch_ids.push_back(bag.batch_ids.empty() ? 0 : bag.batch_ids[idx]);
  }
  return out;
}

CalibratedGate bbucp(const std::vector<ResidualBag>& batch_residuals,
                     double alpha, std::size_t k, std::uint64_t seed) {
  if (batch_residuals.empty()) throw EmptyBag("no calibration bags");
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw InvalidConfig("alpha must lie in (0, 1)");
  }
  if (k == 0) {
    throw InvalidConfig("bbucp needs K >= 1; use bucp for the unbootstrapped pool");
  }
  const std::size_t i = batch_residuals.front().size();
  if (i == 0) throw EmptyBag("calibration bag 0 is empty");

  std::vector<double> pooled;
  pooled.reserve(batch_residuals.size() * k);
  for (std::size_t j = 0; j < batch_residuals.size(); ++j) {
    if (batch_residuals[j].size() != i) {
      throw InconsistentBatchSizes(i, batch_residuals[j].size());
    }
    const ResidualBag replicates =
        bootstrap_batch(batch_residuals[j], k, derive_seed(seed, j));
    pooled.insert(pooled.end(), replicates.values.begin(), replicates.values.end());
  }

  CalibratedGate gate;
  gate.method = GateMethod::bbucp;
  gate.alpha = alpha;
  gate.batches = batch_residuals.size();
  gate.batch_size = i;
  gate.bootstrap_k = k;
  gate.seed = seed;
  gate.q = adjusted_quantile(pooled, batch_residuals.size(), alpha);
  return gate;
}

bool apply_gate(const CalibratedGate& gate, double score) {
  return score <= gate.q;
}

}  // namespace confgate
