#pragma once

#include <cstddef>
#include <vector>

namespace confgate {

// Upper bound of the leave-one-out conformity score. The LOO score drops the
// self inner product, so its energy can reach 0 and the score spans [0, 1].
inline constexpr double kResidualBound = 1.0;

// Multiset of conformity residuals with provenance: which batch each value
// came from and the size of the leave-one-out base it was scored against.
struct ResidualBag {
  std::vector<double> values;
  std::vector<int> batch_ids;   // parallel to values
  std::size_t base_size = 0;    // rows in the LOO base (I - 1 for batch LOO)

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
};

}  // namespace confgate
