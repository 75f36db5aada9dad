#include "confgate/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "confgate/errors.hpp"

namespace confgate {

namespace {

double row_norm(std::span<const double> row) {
  double s = 0.0;
  for (double x : row) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<double> data, std::size_t rows,
                                 std::size_t dim, bool normalized)
    : data_(std::move(data)), rows_(rows), dim_(dim), normalized_(normalized) {
  if (rows_ == 0 || dim_ == 0) {
    throw InvalidConfig("embedding matrix needs n >= 1 rows and d >= 1 columns");
  }
  if (data_.size() != rows_ * dim_) {
    throw DimensionMismatch("embedding data has " + std::to_string(data_.size()) +
                            " entries, expected " + std::to_string(rows_ * dim_));
  }
  if (normalized_) {
    for (std::size_t i = 0; i < rows_; ++i) {
      if (std::fabs(row_norm(row(i)) - 1.0) > kNormTol) {
        throw NotNormalized("row " + std::to_string(i) +
                            " is not unit-norm but the matrix is flagged normalized");
      }
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::from_rows(
    const std::vector<std::vector<double>>& rows, bool normalized) {
  if (rows.empty()) throw InvalidConfig("embedding matrix needs n >= 1 rows");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw DimensionMismatch("row " + std::to_string(i) + " has dimension " +
                              std::to_string(rows[i].size()) + ", expected " +
                              std::to_string(d));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return EmbeddingMatrix(std::move(flat), rows.size(), d, normalized);
}

GramMatrix::GramMatrix(std::vector<double> entries, std::size_t n,
                       bool from_normalized)
    : entries_(std::move(entries)), n_(n), from_normalized_(from_normalized) {
  if (n_ == 0 || entries_.size() != n_ * n_) {
    throw DimensionMismatch("gram matrix entries do not form an n x n matrix");
  }
}

EmbeddingMatrix unit_normalize(const EmbeddingMatrix& raw) {
  std::vector<double> out;
  out.reserve(raw.rows() * raw.dim());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const auto r = raw.row(i);
    const double norm = row_norm(r);
    if (norm < kZeroRowTol) throw ZeroVectorRow(i);
    for (double x : r) out.push_back(x / norm);
  }
  return EmbeddingMatrix(std::move(out), raw.rows(), raw.dim(), true);
}

GramMatrix gram(const EmbeddingMatrix& embeddings) {
  const std::size_t n = embeddings.rows();
  std::vector<double> entries(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    entries[i * n + i] = dot(embeddings.row(i), embeddings.row(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = dot(embeddings.row(i), embeddings.row(j));
      entries[i * n + j] = g;
      entries[j * n + i] = g;
    }
  }
  return GramMatrix(std::move(entries), n, embeddings.normalized());
}

ScoreVector interaction_energy(const GramMatrix& g) {
  if (!g.from_normalized()) {
    throw NotNormalized(
        "interaction energy is only defined for Gram matrices of unit-norm "
        "embeddings; call unit_normalize first");
  }
  const std::size_t n = g.size();
  ScoreVector out;
  out.kind = ScoreKind::energy;
  out.bound = std::sqrt(static_cast<double>(n));
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double gij = g.at(j, i);
      s += gij * gij;
    }
    out.values.push_back(std::sqrt(s));
  }
  return out;
}

ScoreVector atypical_score(const ScoreVector& energy) {
  if (energy.kind != ScoreKind::energy || energy.bound <= 0.0) {
    throw InvalidConfig("atypical_score expects an energy ScoreVector with a positive bound");
  }
  ScoreVector out;
  out.kind = ScoreKind::atypical;
  out.bound = 1.0;
  out.values.reserve(energy.values.size());
  for (double e : energy.values) out.values.push_back(clamp01(1.0 - e / energy.bound));
  return out;
}

double score_against_base(std::span<const double> v, const EmbeddingMatrix& base) {
  if (!base.normalized()) {
    throw NotNormalized("score_against_base requires a normalized base");
  }
  if (v.size() != base.dim()) {
    throw DimensionMismatch("candidate has dimension " + std::to_string(v.size()) +
                            ", base has " + std::to_string(base.dim()));
  }
  if (std::fabs(row_norm(v) - 1.0) > kNormTol) {
    throw NotNormalized("score_against_base requires a unit-norm candidate");
  }
  const std::size_t m = base.rows();
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double g = dot(v, base.row(j));
    s += g * g;
  }
  return clamp01(1.0 - std::sqrt(s) / std::sqrt(static_cast<double>(m)));
}

ResidualBag loo_residuals(const EmbeddingMatrix& batch, int batch_id) {
  if (!batch.normalized()) {
    throw NotNormalized("loo_residuals requires a normalized batch");
  }
  const std::size_t n = batch.rows();
  if (n < 2) throw BatchTooSmall(n);

  const GramMatrix g = gram(batch);
  const double base = std::sqrt(static_cast<double>(n - 1));
  ResidualBag bag;
  bag.base_size = n - 1;
  bag.values.reserve(n);
  bag.batch_ids.assign(n, batch_id);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double gij = g.at(i, j);
      s += gij * gij;
    }
    bag.values.push_back(clamp01(1.0 - std::sqrt(s) / base));
  }
  return bag;
}

}  // namespace confgate
