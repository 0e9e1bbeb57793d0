#pragma once

#include "isingsel/common.hpp"
#include "isingsel/sampling.hpp"

#include <cmath>

namespace isingsel {

/// Node-conditional regression view of a sample matrix: response x_r,
/// covariates x_{\r} (coef_index order), per-row weights summing to one.
/// With `intercept`, a trailing column of ones is appended.
template <typename Scalar>
struct NodeDesign {
  Matrix<Scalar> covariates;
  Vector<Scalar> response;
  Vector<Scalar> row_weights;
  Index center = 0;
  bool intercept = false;

  [[nodiscard]] Index rows() const noexcept { return covariates.rows(); }
  [[nodiscard]] Index dim() const noexcept { return covariates.cols(); }
  /// Number of penalized coefficients (p - 1).
  [[nodiscard]] Index penalized_dim() const noexcept { return dim() - (intercept ? 1 : 0); }

  /// Uniform 1/n row weights.
  static NodeDesign from(const SampleMatrix& data, Index r, bool intercept = false) {
    Vector<Scalar> w = Vector<Scalar>::Constant(data.n(), Scalar(1) / Scalar(data.n()));
    return weighted(data, w, r, intercept);
  }

  /// Explicit row weights, e.g. exact probabilities over all configurations.
  static NodeDesign weighted(const SampleMatrix& data, const Vector<Scalar>& weights, Index r,
                             bool intercept = false) {
    if (r < 0 || r >= data.p()) throw std::invalid_argument("node design: center out of range");
    if (weights.size() != data.n()) throw std::invalid_argument("node design: weight count mismatch");
    const Index p = data.p();
    NodeDesign d;
    d.center = r;
    d.intercept = intercept;
    d.covariates.resize(data.n(), p - 1 + (intercept ? 1 : 0));
    d.response.resize(data.n());
    for (Index i = 0; i < data.n(); ++i) {
      d.response(i) = Scalar(data(i, r));
      for (Index j = 0; j < p - 1; ++j) d.covariates(i, j) = Scalar(data(i, coef_vertex(r, j)));
      if (intercept) d.covariates(i, p - 1) = Scalar(1);
    }
    d.row_weights = weights;
    return d;
  }

  /// Empirical moments mu_hat_{ru} = sum_i w_i x_r x_u.
  [[nodiscard]] Vector<Scalar> moments() const {
    return covariates.transpose() * row_weights.cwiseProduct(response);
  }

  void check_dim(Index size) const {
    if (size != dim())
      throw std::invalid_argument("coefficient vector has size " + std::to_string(size) +
                                  ", design expects " + std::to_string(dim()));
  }
};

namespace detail {

/// log(e^a + e^{-a}) without overflow.
template <typename Scalar>
Scalar log_two_cosh(Scalar a) {
  using std::abs, std::exp, std::log1p;
  const Scalar m = abs(a);
  return m + log1p(exp(Scalar(-2) * m));
}

}  // namespace detail

}  // namespace isingsel
