#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "confgate/residual_bag.hpp"

namespace confgate {

// Tolerance for unit-norm and symmetry checks (double accumulation over
// dimensions up to a few thousand).
inline constexpr double kNormTol = 1e-9;

// Rows below this norm are unusable embedding input.
inline constexpr double kZeroRowTol = 1e-12;

// n x d row-stacked response embeddings.
class EmbeddingMatrix {
 public:
  // data is row-major with rows*dim entries. Pass normalized=true only when
  // every row already has unit Euclidean norm; this is verified to kNormTol.
  EmbeddingMatrix(std::vector<double> data, std::size_t rows, std::size_t dim,
                  bool normalized = false);

  static EmbeddingMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                   bool normalized = false);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::vector<double> data_;
  std::size_t rows_;
  std::size_t dim_;
  bool normalized_;
};

// n x n matrix of row inner products (cosines for normalized input).
class GramMatrix {
 public:
  GramMatrix(std::vector<double> entries, std::size_t n, bool from_normalized);

  std::size_t size() const noexcept { return n_; }
  bool from_normalized() const noexcept { return from_normalized_; }

  double at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

 private:
  std::vector<double> entries_;
  std::size_t n_;
  bool from_normalized_;
};

enum class ScoreKind { energy, atypical };

// Per-response scores plus the bound they are measured against: sqrt(n) for
// interaction energies, 1 for atypical scores.
struct ScoreVector {
  std::vector<double> values;
  ScoreKind kind = ScoreKind::energy;
  double bound = 0.0;
};

// Scales every row to unit Euclidean norm. Throws ZeroVectorRow for rows with
// norm below kZeroRowTol.
EmbeddingMatrix unit_normalize(const EmbeddingMatrix& raw);

GramMatrix gram(const EmbeddingMatrix& embeddings);

// Column norms of the Gram matrix; requires a Gram built from normalized
// embeddings so that the [1, sqrt(n)] bound applies.
ScoreVector interaction_energy(const GramMatrix& g);

// 1 - energy/bound, clamped into [0, 1].
ScoreVector atypical_score(const ScoreVector& energy);

// Conformity score of a unit vector v against a normalized base of m rows:
// phi = 1 - ||(<v, b_1>, ..., <v, b_m>)|| / sqrt(m). The self term is absent,
// so phi spans [0, 1].
double score_against_base(std::span<const double> v, const EmbeddingMatrix& base);

// Within-batch leave-one-out residuals: row i scored against the batch with
// row i removed. Requires at least 2 rows.
ResidualBag loo_residuals(const EmbeddingMatrix& batch, int batch_id = 0);

}  // namespace confgate
