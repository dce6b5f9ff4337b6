#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace qendy {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Closed interval [lo, hi] along one state axis.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Axis-aligned box, one interval per state coordinate.
using Box = std::vector<Interval>;

inline Box symmetric_box(std::size_t dim, double half_width) {
  return Box(dim, Interval{-half_width, half_width});
}

}  // namespace qendy
