#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isingsel {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a request would exceed a hard computational cap
/// (e.g. exhaustive enumeration over too many variables).
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximum number of variables for exhaustive enumeration.
inline constexpr int kEnumerationCap = 20;

/// Coefficient slot of vertex t in the regression vector of center r.
/// Vertices are 0-based internally; the vector skips r.
constexpr Index coef_index(Index r, Index t) noexcept { return t < r ? t : t - 1; }

/// Inverse of coef_index.
constexpr Index coef_vertex(Index r, Index j) noexcept { return j < r ? j : j + 1; }

}  // namespace isingsel
