#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "confgate/residual_bag.hpp"

namespace confgate {

// Order-statistic quantile convention shared by every calibrator: the k-th
// smallest value with k = ceil(level * m). Matches the ceil((1-a)(n+1)) index
// arithmetic of the split coverage proof.
inline constexpr const char* kQuantileConvention = "kth-smallest-ceil";

// Guard for index arithmetic: levels like 1 - delta_J/J are meant to hit
// exact integers (e.g. 8/9 * 90 = 80) but land an ulp off in floating point.
inline constexpr double kIndexEps = 1e-9;

// ceil(x) with the kIndexEps backward guard, clamped to >= 1. Shared by every
// order-statistic index computation in the project.
std::size_t ceil_index(double x);

enum class GateMethod { split, full, bucp, bbucp };

std::string to_string(GateMethod method);
GateMethod gate_method_from_string(const std::string& name);

// A calibrated scalar threshold plus the metadata needed to reproduce it.
// Scores <= q are kept (closed prediction set).
struct CalibratedGate {
  double q = kResidualBound;
  GateMethod method = GateMethod::split;
  double alpha = 0.0;
  std::size_t batches = 0;      // J: calibration batches pooled
  std::size_t batch_size = 0;   // I: residuals per batch
  std::size_t bootstrap_k = 0;  // K: bootstrap replicates per batch (0 = none)
  std::uint64_t seed = 0;       // RNG seed (0 when the method draws nothing)
  std::string convention = kQuantileConvention;
};

// k-th smallest with k = ceil(level * m), level in (0, 1]; level 1 is the max.
double quantile(const ResidualBag& bag, double level);

// Split-UCP: q is the ceil((1-alpha)(m+1))-th smallest calibration residual,
// or the score bound when that index exceeds m.
CalibratedGate split_ucp(const ResidualBag& calib, double alpha);

// Conformal p-value of a candidate residual against a pool of n residuals:
// (#{r in pool : r >= candidate} + 1) / (n + 1). Membership at level alpha
// is p >= alpha.
double full_ucp_pvalue(const ResidualBag& pool, double candidate_residual);

// Threshold form of the Full-UCP acceptance rule over scalar residual space:
// apply_gate(full_ucp_gate(pool, a), s) == (full_ucp_pvalue(pool, s) >= a).
CalibratedGate full_ucp_gate(const ResidualBag& pool, double alpha);

// Batch U-CP: pool per-batch LOO residual bags and take the adjusted
// (1 - delta_J/J)-quantile with delta_J = (J+1)alpha - 1. delta_J < 0 yields
// the degenerate full-space gate; delta_J = 0 takes the pooled maximum.
CalibratedGate bucp(const std::vector<ResidualBag>& batch_residuals, double alpha);

// K values resampled i.i.d. with replacement, reproducible from the seed.
ResidualBag bootstrap_batch(const ResidualBag& bag, std::size_t k,
                            std::uint64_t seed);

// Batch Bootstrap U-CP: per batch draw K bootstrap replicates (seed derived
// per batch), pool all J*K values, then apply the identical adjusted
// quantile rule as bucp.
CalibratedGate bbucp(const std::vector<ResidualBag>& batch_residuals,
                     double alpha, std::size_t k, std::uint64_t seed);

// True iff the score falls inside the prediction set (score <= q).
bool apply_gate(const CalibratedGate& gate, double score);

}  // namespace confgate
