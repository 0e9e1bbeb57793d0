#pragma once

// Fisher information of the node-conditional likelihood, the dependency and
// incoherence checks on it, the sufficient-condition thresholds, and
// empirical concentration probes of the sample matrix around its
// population counterpart.

#include "isingsel/common.hpp"
#include "isingsel/design.hpp"
#include "isingsel/graphs.hpp"
#include "isingsel/rng.hpp"
#include "isingsel/sampling.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <iosfwd>
#include <optional>
#include <vector>

namespace isingsel {

/// Variance function 4 e^{2b} / (e^{2b} + 1)^2 where b = x_r <theta, x_{\r}>.
/// Even in b; equals 1 at b = 0 and lies in (0, 1].
template <typename Scalar>
Scalar eta(Scalar b) {
  using std::abs, std::exp;
  const Scalar e = exp(Scalar(-2) * abs(b));
  const Scalar denom = Scalar(1) + e;
  return Scalar(4) * e / (denom * denom);
}

/// eta for a full configuration x in {-1,+1}^p and center r.
template <typename Scalar>
Scalar eta(const Eigen::Ref<const Eigen::VectorXi>& x, const Vector<Scalar>& theta, Index r) {
  if (x.size() != theta.size() + 1) throw std::invalid_argument("eta: dimension mismatch");
  Scalar field(0);
  for (Index j = 0; j < theta.size(); ++j) field += theta(j) * Scalar(x(coef_vertex(r, j)));
  return eta<Scalar>(Scalar(x(r)) * field);
}

enum class FisherKind { Population, Sample };

template <typename Scalar>
struct FisherMatrix {
  Index center = 0;
  FisherKind kind = FisherKind::Sample;
  Matrix<Scalar> Q;
};

/// sum_i w_i eta_i x_i x_i^T over the design rows. Shared by the sample
/// Fisher matrix and the loss Hessian so both are bit-identical.
template <typename Scalar>
Matrix<Scalar> weighted_fisher(const NodeDesign<Scalar>& design, const Vector<Scalar>& theta) {
  design.check_dim(theta.size());
  const Vector<Scalar> field = design.covariates * theta;
  Vector<Scalar> weights(design.rows());
  for (Index i = 0; i < design.rows(); ++i)
    weights(i) = design.row_weights(i) * eta<Scalar>(design.response(i) * field(i));
  return design.covariates.transpose() * weights.asDiagonal() * design.covariates;
}

template <typename Scalar>
FisherMatrix<Scalar> sample_fisher(const NodeDesign<Scalar>& design, const Vector<Scalar>& theta) {
  return {design.center, FisherKind::Sample, weighted_fisher(design, theta)};
}

template <typename Scalar>
FisherMatrix<Scalar> sample_fisher(const SampleMatrix& data, const Vector<Scalar>& theta, Index r) {
  return sample_fisher(NodeDesign<Scalar>::from(data, r), theta);
}

/// Q* = E[eta(X; theta*) X_{\r} X_{\r}^T] by exact enumeration.
FisherMatrix<double> population_fisher(const IsingModel& model, int r);

/// Same expectation with an explicit table (avoids re-enumerating per node).
FisherMatrix<double> population_fisher(const IsingModel& model, const DistributionTable& table,
                                       int r);

/// Induced infinity norm: maximum absolute row sum.
template <typename Derived>
typename Derived::Scalar inf_norm(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() == 0 || a.cols() == 0) return Scalar(0);
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Principal submatrix A(rows, cols).
template <typename Scalar>
Matrix<Scalar> submatrix(const Matrix<Scalar>& a, const std::vector<Index>& rows,
                         const std::vector<Index>& cols) {
  Matrix<Scalar> out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  return out;
}

/// Complement of `subset` in [0, dim), ascending.
std::vector<Index> complement(const std::vector<Index>& subset, Index dim);

template <typename Scalar>
Scalar min_eigenvalue(const Matrix<Scalar>& symmetric) {
  if (symmetric.size() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

template <typename Scalar>
Scalar max_eigenvalue(const Matrix<Scalar>& symmetric) {
  if (symmetric.size() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

/// Largest absolute eigenvalue of a symmetric matrix (its spectral norm).
template <typename Scalar>
Scalar spectral_norm(const Matrix<Scalar>& symmetric) {
  if (symmetric.size() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Scalar>
struct AssumptionReport {
  std::optional<Scalar> c_min_hat;    ///< Lambda_min(Q_SS); empty when S is empty
  Scalar d_max_hat{0};                ///< Lambda_max(second moment)
  std::optional<Scalar> incoherence;  ///< empty when Q_SS is singular
  std::optional<Scalar> alpha_hat;
  Scalar alpha_required{1};
  bool passes_a1 = false;
  bool passes_a2 = false;
};

/// Dependency and incoherence diagnostics for a Fisher matrix restricted to
/// support S (coefficient indices). A singular Q_SS is reported, not thrown.
template <typename Scalar>
AssumptionReport<Scalar> check_assumptions(const Matrix<Scalar>& Q, const Matrix<Scalar>& second_moment,
                                           const std::vector<Index>& support, Scalar alpha_required,
                                           Scalar pd_tol = Scalar(1e-10)) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("check_assumptions: Q must be square");
  if (!(alpha_required > Scalar(0) && alpha_required <= Scalar(1)))
    throw std::invalid_argument("check_assumptions: alpha_required must lie in (0, 1]");
  for (Index s : support)
    if (s < 0 || s >= Q.rows()) throw std::invalid_argument("check_assumptions: support index out of range");

  AssumptionReport<Scalar> report;
  report.alpha_required = alpha_required;
  report.d_max_hat = max_eigenvalue(second_moment);
  if (support.empty()) return report;

  const Matrix<Scalar> q_ss = submatrix(Q, support, support);
  const Scalar c_min = min_eigenvalue(q_ss);
  report.c_min_hat = c_min;
  report.passes_a1 = c_min > pd_tol && std::isfinite(static_cast<double>(report.d_max_hat));
  if (!(c_min > pd_tol)) return report;

  const std::vector<Index> off = complement(support, Q.rows());
  const Matrix<Scalar> q_sc_s = submatrix(Q, off, support);
  // Q_{S^c S} Q_SS^{-1} = (Q_SS^{-1} Q_{S S^c})^T for symmetric Q_SS.
  const Matrix<Scalar> coupling = q_ss.ldlt().solve(q_sc_s.transpose()).transpose();
  const Scalar incoherence = inf_norm(coupling);
  report.incoherence = incoherence;
  report.alpha_hat = Scalar(1) - incoherence;
  report.passes_a2 = incoherence <= Scalar(1) - alpha_required;
  return report;
}

struct TheoremThresholds {
  double lambda_min = 0.0;        ///< (16 (2 - alpha) / alpha) sqrt(ln p / n)
  double weight_threshold = 0.0;  ///< (10 / C_min) sqrt(d) lambda_min
  double sample_size_form = 0.0;  ///< d^3 ln p; the leading constant is unknown
};

TheoremThresholds theorem_thresholds(double c_min, double alpha, int d, int p, double n);

/// Smallest lambda satisfying the regularization condition for given (alpha, p, n).
double lambda_lower_bound(double alpha, int p, double n);

void write_record(std::ostream& out, const AssumptionReport<double>& report);
void write_record(std::ostream& out, const TheoremThresholds& thresholds);

struct Quantiles {
  double q10 = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};

/// Linear-interpolation quantiles of a sample (empty input gives zeros).
Quantiles summarize(std::vector<double> values);

struct ProbeCell {
  Index n = 0;
  int rep = 0;
  double spectral_deviation = 0.0;  ///< ||Q^n_SS - Q*_SS||_2
  double min_eig_deviation = 0.0;   ///< |Lambda_min(Q^n_SS) - Lambda_min(Q*_SS)|
  std::optional<double> incoherence;
};

struct ProbeSummary {
  Index n = 0;
  Quantiles spectral_deviation;
  Quantiles min_eig_deviation;
  Quantiles incoherence;
  int singular_count = 0;
};

struct ConcentrationTable {
  std::vector<ProbeCell> cells;       ///< ordered by (n_grid position, rep)
  std::vector<ProbeSummary> summary;  ///< one per n, in n_grid order
};

/// For each n and rep, draws n exact samples, forms Q^n at theta* and
/// compares its support block against Q*. Cell seeds derive from
/// (seed, n, rep) so results do not depend on `jobs`.
ConcentrationTable concentration_probe(const IsingModel& model, int r, const std::vector<Index>& n_grid,
                                       int reps, std::uint64_t seed, unsigned jobs = 1);

/// Same probe over an explicit support instead of the true neighborhood.
ConcentrationTable concentration_probe(const IsingModel& model, int r, const std::vector<Index>& support,
                                       const std::vector<Index>& n_grid, int reps, std::uint64_t seed,
                                       unsigned jobs = 1);

/// Coefficient indices of the true neighbors of r.
std::vector<Index> support_of(const IsingModel& model, int r);

}  // namespace isingsel
