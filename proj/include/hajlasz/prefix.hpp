#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hajlasz/grid.hpp"

namespace hajlasz {

// Summed-volume table over a grid: box sums in O(2^dim). Infinite samples are counted
// separately so that a box containing one sums to +inf instead of inf - inf. Partial sums are
// kept in extended precision to limit cancellation on large grids.
class SummedVolumeTable {
 public:
  SummedVolumeTable(const BoxDomain& d, std::span<const double> values) : dim_(d.dim()) {
    std::size_t s = 1;
    for (int a = dim_ - 1; a >= 0; --a) {
      ext_[a] = d.resolution(a) + 1;
      stride_[a] = s;
      s *= ext_[a];
    }
    sum_.assign(s, 0.0L);
    infinite_.assign(s, 0);
    bool any_inf = false;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Index idx = d.multi_index(i);
      std::size_t t = 0;
      for (int a = 0; a < dim_; ++a) t += static_cast<std::size_t>(idx[a] + 1) * stride_[a];
      if (std::isinf(values[i])) {
        infinite_[t] = 1;
        any_inf = true;
      } else {
        sum_[t] = values[i];
      }
    }
    has_infinite_ = any_inf;
    for (int a = 0; a < dim_; ++a) {
      for (std::size_t t = 0; t < s; ++t) {
        if ((t / stride_[a]) % ext_[a] > 0) {
          sum_[t] += sum_[t - stride_[a]];
          if (any_inf) infinite_[t] += infinite_[t - stride_[a]];
        }
      }
    }
  }

  /// Sum over cells lo[a] <= i[a] < hi[a].
  double box_sum(const std::array<std::size_t, 3>& lo, const std::array<std::size_t, 3>& hi) const {
    long double s = 0.0L;
    std::int64_t inf = 0;
    for (int corner = 0; corner < (1 << dim_); ++corner) {
      std::size_t t = 0;
      int lows = 0;
      for (int a = 0; a < dim_; ++a) {
        if (corner & (1 << a)) {
          t += lo[a] * stride_[a];
          ++lows;
        } else {
          t += hi[a] * stride_[a];
        }
      }
      const bool plus = lows % 2 == 0;
      s += plus ? sum_[t] : -sum_[t];
      if (has_infinite_) inf += plus ? infinite_[t] : -infinite_[t];
    }
    return inf > 0 ? kInf : static_cast<double>(s);
  }

 private:
  int dim_;
  std::array<std::size_t, 3> ext_{1, 1, 1};
  std::array<std::size_t, 3> stride_{0, 0, 0};
  std::vector<long double> sum_;
  std::vector<std::int64_t> infinite_;
  bool has_infinite_ = false;
};

}  // namespace hajlasz
