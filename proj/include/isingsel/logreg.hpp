#pragma once

// l1-regularized node-conditional logistic regression.
//
// For center r the smooth part of the objective is
//   l(theta) = sum_i w_i f(a_i) - <theta, mu_hat>,  f(a) = log(e^a + e^{-a}),
// with a_i = <theta, x_{i,\r}> and mu_hat = sum_i w_i x_{i,r} x_{i,\r}. With
// uniform weights this is the rescaled negative conditional log-likelihood,
// so the fitted coefficients estimate theta*_{\r} directly.

#include "isingsel/common.hpp"
#include "isingsel/design.hpp"
#include "isingsel/fisher.hpp"
#include "isingsel/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace isingsel {

template <typename Scalar>
Scalar nll(const NodeDesign<Scalar>& design, const Vector<Scalar>& theta) {
  design.check_dim(theta.size());
  const Vector<Scalar> field = design.covariates * theta;
  Scalar total(0);
  for (Index i = 0; i < design.rows(); ++i)
    total += design.row_weights(i) * (detail::log_two_cosh(field(i)) - design.response(i) * field(i));
  return total;
}

template <typename Scalar>
Vector<Scalar> grad_nll(const NodeDesign<Scalar>& design, const Vector<Scalar>& theta) {
  design.check_dim(theta.size());
  using std::tanh;
  const Vector<Scalar> field = design.covariates * theta;
  Vector<Scalar> residual(design.rows());
  for (Index i = 0; i < design.rows(); ++i)
    residual(i) = design.row_weights(i) * (tanh(field(i)) - design.response(i));
  return design.covariates.transpose() * residual;
}

/// Hessian of nll; identical by construction to the sample Fisher matrix.
template <typename Scalar>
Matrix<Scalar> hessian_nll(const NodeDesign<Scalar>& design, const Vector<Scalar>& theta) {
  return weighted_fisher(design, theta);
}

template <typename Scalar>
Scalar nll(const Vector<Scalar>& theta, const SampleMatrix& data, Index r) {
  return nll(NodeDesign<Scalar>::from(data, r), theta);
}

template <typename Scalar>
Vector<Scalar> grad_nll(const Vector<Scalar>& theta, const SampleMatrix& data, Index r) {
  return grad_nll(NodeDesign<Scalar>::from(data, r), theta);
}

template <typename Scalar>
Matrix<Scalar> hessian_nll(const Vector<Scalar>& theta, const SampleMatrix& data, Index r) {
  return hessian_nll(NodeDesign<Scalar>::from(data, r), theta);
}

struct SolverOptions {
  double kkt_tol = 1e-6;
  int max_iters = 5000;
  double backtrack_factor = 0.5;
  double initial_step_scale = 1.0;  ///< starting Lipschitz estimate
  double zero_guard = 1e-8;         ///< |theta_j| below this is set to zero
  double coefficient_cap = 30.0;    ///< box bound used only when lambda == 0
  bool fit_intercept = false;
  bool record_objective = false;
};

enum class SolverStatus { Converged, MaxIterations, CoefficientCap };

template <typename Scalar>
struct RegressionSolution {
  Vector<Scalar> theta;  ///< penalized coefficients, coef_index order
  Vector<Scalar> zhat;   ///< -grad / lambda (zero when lambda == 0)
  Scalar intercept{0};
  Scalar lambda{0};
  Scalar objective{0};
  Scalar kkt_residual{0};
  int iterations = 0;
  bool converged = false;
  SolverStatus status = SolverStatus::MaxIterations;
  std::vector<Scalar> objective_trace;  ///< accepted iterates, when requested
};

template <typename Scalar>
struct NodeRegressionProblem {
  const SampleMatrix* data = nullptr;
  Index center = 0;
  Scalar lambda{0};
};

namespace detail {

template <typename Scalar>
Scalar soft_threshold(Scalar v, Scalar tau) {
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return Scalar(0);
}

/// Per-coordinate penalty weight: 1 for penalized slots, 0 for the intercept.
template <typename Scalar>
Scalar penalty_weight(const NodeDesign<Scalar>& design, Index j) {
  return design.intercept && j == design.dim() - 1 ? Scalar(0) : Scalar(1);
}

template <typename Scalar>
Scalar penalty(const NodeDesign<Scalar>& design, const Vector<Scalar>& theta) {
  return theta.head(design.penalized_dim()).template lpNorm<1>();
}

}  // namespace detail

/// max_j dist(-grad_j, lambda * subdifferential |theta_j|). Coordinates
/// sitting on the box bound `cap` with the gradient pushing outward are
/// treated as satisfied.
template <typename Scalar>
Scalar kkt_residual(const NodeDesign<Scalar>& design, const Vector<Scalar>& theta,
                    const Vector<Scalar>& grad, Scalar lambda,
                    Scalar cap = std::numeric_limits<Scalar>::infinity()) {
  using std::abs;
  Scalar worst(0);
  for (Index j = 0; j < theta.size(); ++j) {
    const Scalar lam = lambda * detail::penalty_weight(design, j);
    Scalar r;
    if (theta(j) != Scalar(0)) {
      r = abs(grad(j) + lam * (theta(j) > 0 ? Scalar(1) : Scalar(-1)));
      if (abs(theta(j)) >= cap && grad(j) * theta(j) < Scalar(0)) r = Scalar(0);
    } else {
      r = std::max(Scalar(0), abs(grad(j)) - lam);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

/// Accelerated proximal gradient with backtracking, function-value restart
/// and gradient restart. Accepted iterates have non-increasing objective up
/// to a rounding slack of 64 ulp. Stops when
/// the KKT residual is below kkt_tol * min(1, lambda); that keeps
/// |zhat_j| <= 1 + kkt_tol off the support.
template <typename Scalar>
RegressionSolution<Scalar> fit_l1_logistic(const NodeDesign<Scalar>& design, Scalar lambda,
                                           const SolverOptions& opts = {},
                                           const Vector<Scalar>* warm_start = nullptr) {
  using std::abs, std::sqrt;
  if (!(lambda >= Scalar(0))) throw std::invalid_argument("fit_l1_logistic: lambda must be >= 0");
  if (design.rows() < 1) throw std::invalid_argument("fit_l1_logistic: empty data");
  if (!(opts.backtrack_factor > 0.0 && opts.backtrack_factor < 1.0))
    throw std::invalid_argument("fit_l1_logistic: backtrack factor must lie in (0, 1)");
  if (opts.max_iters < 1) throw std::invalid_argument("fit_l1_logistic: max_iters must be >= 1");

  const Index dim = design.dim();
  const Scalar cap = lambda == Scalar(0) ? Scalar(opts.coefficient_cap) : std::numeric_limits<Scalar>::infinity();
  const Scalar tol = Scalar(opts.kkt_tol) * (lambda > Scalar(0) ? std::min(Scalar(1), lambda) : Scalar(1));

  auto prox = [&](const Vector<Scalar>& v, Scalar step) {
    Vector<Scalar> out(dim);
    for (Index j = 0; j < dim; ++j) {
      Scalar value = detail::soft_threshold(v(j), step * lambda * detail::penalty_weight(design, j));
      out(j) = std::clamp(value, -cap, cap);
    }
    return out;
  };
  auto objective = [&](const Vector<Scalar>& th) { return nll(design, th) + lambda * detail::penalty(design, th); };

  RegressionSolution<Scalar> sol;
  sol.lambda = lambda;
  Vector<Scalar> theta = Vector<Scalar>::Zero(dim);
  if (warm_start != nullptr) {
    design.check_dim(warm_start->size());
    theta = prox(*warm_start, Scalar(0));
  }
  Vector<Scalar> grad = grad_nll(design, theta);
  Scalar obj = objective(theta);
  Scalar residual = kkt_residual(design, theta, grad, lambda, cap);
  if (opts.record_objective) sol.objective_trace.push_back(obj);

  Vector<Scalar> momentum_point = theta;
  Scalar momentum(1);
  Scalar lipschitz = Scalar(opts.initial_step_scale);
  int iter = 0;
  while (residual > tol && iter < opts.max_iters) {
    ++iter;
    const Scalar f_y = nll(design, momentum_point);
    const Vector<Scalar> g_y = grad_nll(design, momentum_point);
    Vector<Scalar> candidate;
    Scalar f_candidate;
    for (;;) {
      candidate = prox(momentum_point - g_y / lipschitz, Scalar(1) / lipschitz);
      const Vector<Scalar> step = candidate - momentum_point;
      f_candidate = nll(design, candidate);
      const Scalar step_sq = step.squaredNorm();
      if (step_sq == Scalar(0)) break;
      // Once the decrease is lost in rounding, the gradient form of the
      // curvature test is the reliable one.
      bool accept;
      if (abs(f_candidate - f_y) > Scalar(1e-10) * std::max(Scalar(1), abs(f_y)))
        accept = f_candidate - f_y - g_y.dot(step) <= Scalar(0.5) * lipschitz * step_sq;
      else
        accept = (grad_nll(design, candidate) - g_y).dot(step) <= lipschitz * step_sq;
      if (accept) break;
      lipschitz /= Scalar(opts.backtrack_factor);
    }
    const Scalar obj_candidate = f_candidate + lambda * detail::penalty(design, candidate);
    const Scalar slack = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), abs(obj));
    if (obj_candidate > obj + slack && momentum_point != theta) {
      // Momentum overshot: restart from the last accepted iterate.
      momentum_point = theta;
      momentum = Scalar(1);
      continue;
    }
    const Vector<Scalar> previous = theta;
    theta = candidate;
    obj = obj_candidate;
    if ((momentum_point - theta).dot(theta - previous) > Scalar(0)) {
      // Gradient-based restart; unlike objective comparisons it stays
      // informative below the rounding level of the loss.
      momentum_point = theta;
      momentum = Scalar(1);
    } else {
      const Scalar next_momentum = (Scalar(1) + sqrt(Scalar(1) + Scalar(4) * momentum * momentum)) / Scalar(2);
      momentum_point = theta + ((momentum - Scalar(1)) / next_momentum) * (theta - previous);
      momentum = next_momentum;
    }
    grad = grad_nll(design, theta);
    residual = kkt_residual(design, theta, grad, lambda, cap);
    if (opts.record_objective) sol.objective_trace.push_back(obj);
  }

  for (Index j = 0; j < design.penalized_dim(); ++j)
    if (abs(theta(j)) < Scalar(opts.zero_guard)) theta(j) = Scalar(0);
  grad = grad_nll(design, theta);
  residual = kkt_residual(design, theta, grad, lambda, cap);

  const Index pen = design.penalized_dim();
  sol.theta = theta.head(pen);
  sol.intercept = design.intercept ? theta(dim - 1) : Scalar(0);
  sol.zhat = lambda > Scalar(0) ? Vector<Scalar>(-grad.head(pen) / lambda) : Vector<Scalar>::Zero(pen);
  sol.objective = objective(theta);
  sol.kkt_residual = residual;
  sol.iterations = iter;
  sol.converged = residual <= tol;
  sol.status = sol.converged ? SolverStatus::Converged : SolverStatus::MaxIterations;
  if (sol.converged && (theta.head(pen).cwiseAbs().array() >= cap).any())
    sol.status = SolverStatus::CoefficientCap;
  return sol;
}

template <typename Scalar>
RegressionSolution<Scalar> fit_l1_logistic(const NodeRegressionProblem<Scalar>& problem,
                                           const SolverOptions& opts = {}) {
  if (problem.data == nullptr) throw std::invalid_argument("fit_l1_logistic: no data");
  const auto design = NodeDesign<Scalar>::from(*problem.data, problem.center, opts.fit_intercept);
  return fit_l1_logistic(design, problem.lambda, opts);
}

template <typename Scalar>
struct WitnessReport {
  Scalar dual_offsupport_max{0};  ///< ||zhat_{S^c}||_inf (0 when S^c is empty)
  bool strictly_dual_feasible = true;
  Scalar hessian_ss_min_eigenvalue{0};
  bool hessian_ss_positive_definite = false;
  std::optional<bool> signs_agree;  ///< set when reference signs are supplied
};

/// Post-hoc primal-dual witness diagnostics for support S (coefficient
/// indices). Never modifies the estimate.
template <typename Scalar>
WitnessReport<Scalar> witness_check(const RegressionSolution<Scalar>& solution, const NodeDesign<Scalar>& design,
                                    const std::vector<Index>& support,
                                    const std::vector<int>* reference_signs = nullptr,
                                    Scalar pd_tol = Scalar(1e-10)) {
  const Index dim = solution.theta.size();
  for (Index s : support)
    if (s < 0 || s >= dim) throw std::invalid_argument("witness_check: support index out of range");
  if (reference_signs != nullptr && reference_signs->size() != support.size())
    throw std::invalid_argument("witness_check: reference sign count must match support size");

  WitnessReport<Scalar> report;
  for (Index j : complement(support, dim))
    report.dual_offsupport_max = std::max(report.dual_offsupport_max, std::abs(solution.zhat(j)));
  report.strictly_dual_feasible = report.dual_offsupport_max < Scalar(1);

  Vector<Scalar> full = solution.theta;
  if (design.intercept) {
    full.conservativeResize(dim + 1);
    full(dim) = solution.intercept;
  }
  const Matrix<Scalar> hessian = hessian_nll(design, full);
  report.hessian_ss_min_eigenvalue = min_eigenvalue<Scalar>(submatrix(hessian, support, support));
  report.hessian_ss_positive_definite = !support.empty() && report.hessian_ss_min_eigenvalue > pd_tol;

  if (reference_signs != nullptr) {
    bool agree = true;
    for (std::size_t k = 0; k < support.size(); ++k) {
      const Scalar value = solution.theta(support[k]);
      const int sign = value > 0 ? 1 : (value < 0 ? -1 : 0);
      agree = agree && sign == (*reference_signs)[k];
    }
    report.signs_agree = agree;
  }
  return report;
}

template <typename Scalar>
WitnessReport<Scalar> witness_check(const RegressionSolution<Scalar>& solution, const SampleMatrix& data,
                                    Index r, const std::vector<Index>& support,
                                    const std::vector<int>* reference_signs = nullptr) {
  return witness_check(solution, NodeDesign<Scalar>::from(data, r), support, reference_signs);
}

}  // namespace isingsel
