#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace cinn {

/// Space-time sample locations, one column per point.
struct Points {
  Eigen::RowVectorXd x;
  Eigen::RowVectorXd t;

  Points() = default;
  Points(Eigen::RowVectorXd xs, Eigen::RowVectorXd ts) : x(std::move(xs)), t(std::move(ts)) {
    if (x.size() != t.size()) throw std::invalid_argument("Points: x and t lengths differ");
  }

  Eigen::Index size() const { return x.size(); }
  bool empty() const { return x.size() == 0; }

  Points slice(Eigen::Index begin, Eigen::Index count) const {
    return {x.segment(begin, count), t.segment(begin, count)};
  }

  /// 2 x n matrix with rows (x, t).
  Eigen::MatrixXd stacked() const {
    Eigen::MatrixXd m(2, size());
    m.row(0) = x;
    m.row(1) = t;
    return m;
  }
};

/// Half-open column range [begin, begin + count) of chunk `k` out of `chunks`
/// over `n` items; chunk sizes differ by at most one.
struct ChunkRange {
  Eigen::Index begin = 0;
  Eigen::Index count = 0;
};

inline ChunkRange chunk_range(Eigen::Index n, std::size_t k, std::size_t chunks) {
  const auto lo = static_cast<Eigen::Index>((static_cast<std::size_t>(n) * k) / chunks);
  const auto hi = static_cast<Eigen::Index>((static_cast<std::size_t>(n) * (k + 1)) / chunks);
  return {lo, hi - lo};
}

}  // namespace cinn
