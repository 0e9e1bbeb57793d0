#include "isingsel/fisher.hpp"
#include "isingsel/logreg.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace isingsel;

namespace {

IsingModel chain4(double w) { return IsingModel(Topology(4, {{0, 1}, {1, 2}, {2, 3}}), {w, w, w}); }

double max_gap(const Matrix<double>& q, const std::vector<std::vector<double>>& ref) {
  double gap = 0.0;
  for (Index u = 0; u < q.rows(); ++u)
    for (Index v = 0; v < q.cols(); ++v) gap = std::max(gap, std::abs(q(u, v) - ref[u][v]));
  return gap;
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_max_eig(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  std::vector<double> x(n, 1.0), y(n);
  double value = 0.0;
  for (int it = 0; it < 2000; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) y[i] += a[i][j] * x[j];
      norm += y[i] * y[i];
    }
    norm = std::sqrt(norm);
    double rayleigh = 0.0;
    for (std::size_t i = 0; i < n; ++i) rayleigh += x[i] * y[i];
    double xx = 0.0;
    for (double v : x) xx += v * v;
    value = rayleigh / xx;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  return value;
}

}  // namespace

TEST_SUITE("fisher") {

TEST_CASE("variance function") {
  CHECK(eta(0.0) == 1.0);
  CHECK(eta(0.5) == doctest::Approx(4.0 * std::exp(1.0) / ((std::exp(1.0) + 1) * (std::exp(1.0) + 1))).epsilon(1e-15));
  CHECK(eta(0.5) == doctest::Approx(0.7864).epsilon(1e-4));
  for (double b = -20.0; b <= 20.0; b += 0.37) {
    const double sigma = 1.0 / (1.0 + std::exp(-2.0 * b));
    CHECK(std::abs(eta(b) - 4.0 * sigma * (1.0 - sigma)) <= 1e-14);
    CHECK(eta(b) > 0.0);
    CHECK(eta(b) <= 1.0);
    CHECK(eta(b) == eta(-b));
  }
  CHECK(eta(400.0) >= 0.0);

  Eigen::VectorXi x(3);
  x << 1, -1, 1;
  CHECK(eta<double>(x, Vector<double>::Zero(2), 1) == 1.0);
  Vector<double> th(2);
  th << 0.25, 0.25;  // b = x_1 (0.25 x_0 + 0.25 x_2) = -0.5
  CHECK(eta<double>(x, th, 1) == doctest::Approx(eta(0.5)));
  CHECK_THROWS_AS(eta<double>(x, Vector<double>::Zero(3), 1), std::invalid_argument);
}

TEST_CASE("population fisher without couplings is the identity") {
  const auto q = population_fisher(IsingModel(Topology(5, {}), {}), 2);
  CHECK(q.kind == FisherKind::Population);
  CHECK(q.center == 2);
  CHECK(q.Q.isIdentity(1e-15));
}

TEST_CASE("population fisher against direct summation") {
  const IsingModel chain = chain4(0.5);
  for (int r = 0; r < 4; ++r) {
    const auto q = population_fisher(chain, r);
    CHECK(max_gap(q.Q, oracle::population_fisher(chain, r)) <= 1e-12);
    CHECK((q.Q - q.Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(min_eigenvalue(q.Q) >= -1e-10);
  }
  CHECK_THROWS_AS(population_fisher(chain, 4), std::invalid_argument);
  const IsingModel big(make_star(21, StarSparsity::Explicit, 2), {0.1, 0.1});
  CHECK_THROWS_AS(population_fisher(big, 0), ResourceLimitError);
}

TEST_CASE("hessian on enumeration-weighted data is the population fisher") {
  Rng rng(3);
  const auto model = assign_couplings(make_grid4(2), CouplingMode::Mixed, 0.5, rng);
  const DistributionTable table = enumerate_distribution(model);
  const Vector<double> probs = Eigen::Map<const Vector<double>>(table.probs.data(), 16);
  for (int r = 0; r < 4; ++r) {
    const auto design = NodeDesign<double>::weighted(table.configurations(), probs, r);
    const Matrix<double> h = hessian_nll(design, model.node_parameters(r));
    CHECK(max_gap(h, oracle::population_fisher(model, r)) <= 1e-12);
  }
}

TEST_CASE("sample fisher") {
  Rng rng(4);
  const SampleMatrix data = sample_exact_enum(chain4(0.5), 400, rng);
  const auto at_zero = sample_fisher<double>(data, Vector<double>::Zero(3), 1);
  const auto design = NodeDesign<double>::from(data, 1);
  CHECK(at_zero.kind == FisherKind::Sample);
  CHECK((at_zero.Q - design.covariates.transpose() * design.covariates / 400.0).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK_THROWS_AS(sample_fisher<double>(data, Vector<double>::Zero(2), 1), std::invalid_argument);
}

TEST_CASE("infinity norm is the max absolute row sum") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix<double> a(4, 4);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) a(i, j) = 2.0 * rng.uniform() - 1.0;
    double brute = 0.0;
    for (int mask = 0; mask < 16; ++mask) {
      Vector<double> x(4);
      for (int j = 0; j < 4; ++j) x(j) = (mask >> j) & 1 ? 1.0 : -1.0;
      brute = std::max(brute, (a * x).cwiseAbs().maxCoeff());
    }
    CHECK(inf_norm(a) == doctest::Approx(brute).epsilon(1e-14));
  }
  CHECK(inf_norm(Matrix<double>(0, 3)) == 0.0);
}

TEST_CASE("assumption report on simple matrices") {
  const Matrix<double> eye = Matrix<double>::Identity(4, 4);
  const auto report = check_assumptions<double>(eye, eye, {0, 2}, 0.5);
  REQUIRE(report.c_min_hat.has_value());
  CHECK(*report.c_min_hat == doctest::Approx(1.0));
  CHECK(*report.incoherence == 0.0);
  CHECK(*report.alpha_hat == 1.0);
  CHECK(report.d_max_hat == doctest::Approx(1.0));
  CHECK(report.passes_a1);
  CHECK(report.passes_a2);

  Matrix<double> block = Matrix<double>::Zero(4, 4);
  block.topLeftCorner(2, 2) << 2.0, 0.5, 0.5, 1.0;
  block.bottomRightCorner(2, 2) << 1.0, -0.3, -0.3, 3.0;
  CHECK(*check_assumptions<double>(block, eye, {0, 1}, 1.0).incoherence == 0.0);

  Matrix<double> singular = Matrix<double>::Ones(3, 3);
  const auto bad = check_assumptions<double>(singular, eye.topLeftCorner(3, 3), {0, 1}, 0.5);
  CHECK_FALSE(bad.passes_a1);
  CHECK_FALSE(bad.incoherence.has_value());
  CHECK_FALSE(bad.passes_a2);

  const auto empty = check_assumptions<double>(eye, eye, {}, 0.5);
  CHECK_FALSE(empty.c_min_hat.has_value());

  CHECK_THROWS_AS(check_assumptions<double>(eye, eye, {0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_assumptions<double>(eye, eye, {7}, 0.5), std::invalid_argument);
}

TEST_CASE("assumption report against a hand-rolled solve") {
  const IsingModel chain = chain4(0.5);
  const int r = 1;  // interior; neighbors 0 and 2 are slots 0 and 1, vertex 3 is slot 2
  const auto q = oracle::population_fisher(chain, r);
  const auto prob = oracle::probabilities(chain);
  std::vector<std::vector<double>> m(3, std::vector<double>(3, 0.0));
  const int others[3] = {0, 2, 3};
  for (std::uint64_t k = 0; k < 16; ++k)
    for (int u = 0; u < 3; ++u)
      for (int v = 0; v < 3; ++v)
        m[u][v] += prob[k] * ((k >> others[u]) & 1 ? 1 : -1) * ((k >> others[v]) & 1 ? 1 : -1);

  const double a = q[0][0], b = q[0][1], c = q[1][1];
  const double det = a * c - b * b;
  const double inv[2][2] = {{c / det, -b / det}, {-b / det, a / det}};
  const double row0 = q[2][0] * inv[0][0] + q[2][1] * inv[1][0];
  const double row1 = q[2][0] * inv[0][1] + q[2][1] * inv[1][1];
  const double incoherence = std::abs(row0) + std::abs(row1);
  const double c_min = (a + c) / 2.0 - std::sqrt((a - c) * (a - c) / 4.0 + b * b);

  const auto fq = population_fisher(chain, r);
  const auto second = enumerate_distribution(chain).second_moments();
  const auto report = check_assumptions<double>(fq.Q, submatrix(second, {0, 2, 3}, {0, 2, 3}), {0, 1}, 0.1);
  CHECK(std::abs(*report.c_min_hat - c_min) <= 1e-10);
  CHECK(std::abs(*report.incoherence - incoherence) <= 1e-10);
  CHECK(std::abs(*report.alpha_hat - (1.0 - incoherence)) <= 1e-10);
  CHECK(std::abs(report.d_max_hat - power_max_eig(m)) <= 1e-10);
  CHECK(report.passes_a2 == (incoherence <= 0.9));
}

TEST_CASE("threshold arithmetic") {
  const double direct = 16.0 * std::sqrt(std::log(64.0) / 1000.0);
  const TheoremThresholds t = theorem_thresholds(1.0, 1.0, 4, 64, 1000.0);
  CHECK(std::abs(t.lambda_min - direct) <= 1e-12);
  CHECK(t.lambda_min == doctest::Approx(1.0319).epsilon(1e-4));
  CHECK(std::abs(t.weight_threshold - 10.0 * 2.0 * direct) <= 1e-12);
  CHECK(t.weight_threshold == doctest::Approx(20.64).epsilon(1e-3));
  CHECK(t.sample_size_form == doctest::Approx(64.0 * std::log(64.0)));

  const TheoremThresholds half = theorem_thresholds(0.5, 0.5, 9, 100, 500.0);
  CHECK(half.lambda_min == doctest::Approx(48.0 * std::sqrt(std::log(100.0) / 500.0)));
  CHECK(half.weight_threshold == doctest::Approx(20.0 * 3.0 * half.lambda_min));

  const TheoremThresholds far = theorem_thresholds(1.0, 1.0, 4, 64, 1e16);
  CHECK(far.lambda_min < 1e-6);
  CHECK(far.weight_threshold < 1e-5);
  CHECK(theorem_thresholds(1.0, 1.0, 8, 64, 1000.0).weight_threshold > t.weight_threshold);

  CHECK_THROWS_AS(theorem_thresholds(1.0, 0.0, 4, 64, 1000.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem_thresholds(1.0, 1.5, 4, 64, 1000.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem_thresholds(0.0, 1.0, 4, 64, 1000.0), std::invalid_argument);
}

TEST_CASE("flat records") {
  std::ostringstream out;
  write_record(out, theorem_thresholds(1.0, 1.0, 4, 64, 1000.0));
  CHECK(out.str().find("lambda_min = 1.031") != std::string::npos);
  std::ostringstream rep;
  const Matrix<double> eye = Matrix<double>::Identity(3, 3);
  write_record(rep, check_assumptions<double>(eye, eye, {0}, 0.5));
  CHECK(rep.str().find("incoherence = 0") != std::string::npos);
  CHECK(rep.str().find("passes_a2 = 1") != std::string::npos);
}

TEST_CASE("quantiles") {
  const Quantiles q = summarize({5.0, 1.0, 3.0, 2.0, 4.0});
  CHECK(q.median == 3.0);
  CHECK(q.q10 == doctest::Approx(1.4));
  CHECK(q.q90 == doctest::Approx(4.6));
  CHECK(summarize({}).median == 0.0);
}

TEST_CASE("concentration probe") {
  Rng rng(7);
  const auto model = assign_couplings(make_grid4(3), CouplingMode::Positive, 0.25, rng);
  const ConcentrationTable table = concentration_probe(model, 4, {1000, 4000}, 12, 99, 2);
  REQUIRE(table.summary.size() == 2);
  CHECK(table.cells.size() == 24);
  for (const auto& cell : table.cells) {
    CHECK(cell.spectral_deviation >= 0.0);
    CHECK(cell.min_eig_deviation >= 0.0);
  }
  const double ratio = table.summary[0].spectral_deviation.median / table.summary[1].spectral_deviation.median;
  CHECK(ratio > 1.3);
  CHECK(ratio < 3.0);

  const ConcentrationTable again = concentration_probe(model, 4, {1000, 4000}, 12, 99, 1);
  CHECK(again.cells.front().spectral_deviation == table.cells.front().spectral_deviation);
  CHECK(again.cells.back().incoherence == table.cells.back().incoherence);
}

TEST_CASE("incoherence of an uncoupled model vanishes with n") {
  const IsingModel free(Topology(5, {}), {});
  const ConcentrationTable table = concentration_probe(free, 0, {0, 1}, {500, 20000}, 10, 3);
  CHECK(table.summary[1].incoherence.median < table.summary[0].incoherence.median);
  CHECK(table.summary[1].incoherence.median < 0.05);
}

}  // TEST_SUITE
