#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace scenefill {

/// Dense 2D grid with row-major storage; (row, col) = (v, u) indexing.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GridF = Grid<float>;
using GridD = Grid<double>;
using GridU8 = Grid<std::uint8_t>;

template <typename Scalar>
bool same_shape(const Grid<Scalar>& a, const Grid<Scalar>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

template <typename A, typename B>
bool same_shape(const Grid<A>& a, const Grid<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace scenefill
