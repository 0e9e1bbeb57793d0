#include "isingsel/fisher.hpp"

#include "isingsel/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace isingsel {

FisherMatrix<double> population_fisher(const IsingModel& model, const DistributionTable& table, int r) {
  if (r < 0 || r >= model.p()) throw std::invalid_argument("population_fisher: vertex out of range");
  if (table.p != model.p()) throw std::invalid_argument("population_fisher: table/model mismatch");
  const Vector<double> probs = Eigen::Map<const Vector<double>>(table.probs.data(),
                                                                static_cast<Index>(table.probs.size()));
  const auto design = NodeDesign<double>::weighted(table.configurations(), probs, r);
  return {r, FisherKind::Population, weighted_fisher(design, model.node_parameters(r))};
}

FisherMatrix<double> population_fisher(const IsingModel& model, int r) {
  return population_fisher(model, enumerate_distribution(model), r);
}

std::vector<Index> complement(const std::vector<Index>& subset, Index dim) {
  std::vector<Index> out;
  for (Index j = 0; j < dim; ++j)
    if (std::find(subset.begin(), subset.end(), j) == subset.end()) out.push_back(j);
  return out;
}

double lambda_lower_bound(double alpha, int p, double n) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("thresholds: alpha must lie in (0, 1]");
  if (p < 2 || !(n > 0.0)) throw std::invalid_argument("thresholds: need p >= 2 and n > 0");
  return 16.0 * (2.0 - alpha) / alpha * std::sqrt(std::log(static_cast<double>(p)) / n);
}

TheoremThresholds theorem_thresholds(double c_min, double alpha, int d, int p, double n) {
  if (!(c_min > 0.0)) throw std::invalid_argument("thresholds: C_min must be positive");
  if (d < 0) throw std::invalid_argument("thresholds: degree must be nonnegative");
  TheoremThresholds out;
  out.lambda_min = lambda_lower_bound(alpha, p, n);
  out.weight_threshold = 10.0 / c_min * std::sqrt(static_cast<double>(d)) * out.lambda_min;
  out.sample_size_form = std::pow(static_cast<double>(d), 3) * std::log(static_cast<double>(p));
  return out;
}

namespace {

void write_optional(std::ostream& out, const char* key, const std::optional<double>& value) {
  out << key << " = ";
  if (value) out << *value;
  else out << "undefined";
  out << '\n';
}

}  // namespace

void write_record(std::ostream& out, const AssumptionReport<double>& report) {
  const auto flags = out.flags();
  const auto precision = out.precision(10);
  write_optional(out, "c_min_hat", report.c_min_hat);
  out << "d_max_hat = " << report.d_max_hat << '\n';
  write_optional(out, "incoherence", report.incoherence);
  write_optional(out, "alpha_hat", report.alpha_hat);
  out << "alpha_required = " << report.alpha_required << '\n';
  out << "passes_a1 = " << (report.passes_a1 ? 1 : 0) << '\n';
  out << "passes_a2 = " << (report.passes_a2 ? 1 : 0) << '\n';
  out.precision(precision);
  out.flags(flags);
}

void write_record(std::ostream& out, const TheoremThresholds& thresholds) {
  const auto flags = out.flags();
  const auto precision = out.precision(10);
  out << "lambda_min = " << thresholds.lambda_min << '\n';
  out << "weight_threshold = " << thresholds.weight_threshold << '\n';
  out << "sample_size_form = " << thresholds.sample_size_form << '\n';
  out.precision(precision);
  out.flags(flags);
}

Quantiles summarize(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.1), at(0.5), at(0.9)};
}

std::vector<Index> support_of(const IsingModel& model, int r) {
  std::vector<Index> out;
  for (int t : model.topology().neighbors(r)) out.push_back(coef_index(r, t));
  std::sort(out.begin(), out.end());
  return out;
}

ConcentrationTable concentration_probe(const IsingModel& model, int r, const std::vector<Index>& n_grid,
                                       int reps, std::uint64_t seed, unsigned jobs) {
  return concentration_probe(model, r, support_of(model, r), n_grid, reps, seed, jobs);
}

ConcentrationTable concentration_probe(const IsingModel& model, int r, const std::vector<Index>& support,
                                       const std::vector<Index>& n_grid, int reps, std::uint64_t seed,
                                       unsigned jobs) {
  if (reps < 1) throw std::invalid_argument("concentration_probe: reps must be >= 1");
  const DistributionTable table = enumerate_distribution(model);
  const Matrix<double> q_star = population_fisher(model, table, r).Q;
  const Matrix<double> q_star_ss = submatrix(q_star, support, support);
  const double c_min_star = min_eigenvalue(q_star_ss);
  const Vector<double> theta_star = model.node_parameters(r);
  const Rng root(seed);

  ConcentrationTable out;
  out.cells.resize(n_grid.size() * static_cast<std::size_t>(reps));
  parallel_for(out.cells.size(), jobs, [&](std::size_t cell) {
    const std::size_t grid_pos = cell / static_cast<std::size_t>(reps);
    const int rep = static_cast<int>(cell % static_cast<std::size_t>(reps));
    const Index n = n_grid[grid_pos];
    Rng rng = root.split(mix64(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)));
    const SampleMatrix data = sample_exact_enum(model, n, rng);
    const Matrix<double> q_n = sample_fisher(data, theta_star, r).Q;
    const Matrix<double> q_n_ss = submatrix(q_n, support, support);

    ProbeCell& result = out.cells[cell];
    result.n = n;
    result.rep = rep;
    result.spectral_deviation = spectral_norm<double>(q_n_ss - q_star_ss);
    result.min_eig_deviation = std::abs(min_eigenvalue(q_n_ss) - c_min_star);
    const std::vector<Index> others = complement({r}, model.p());
    const Matrix<double> moments = submatrix(empirical_second_moments(data), others, others);
    const auto report = check_assumptions<double>(q_n, moments, support, 1.0);
    result.incoherence = report.incoherence;
  });

  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    std::vector<double> spectral, min_eig, incoherence;
    ProbeSummary summary;
    summary.n = n_grid[g];
    for (int rep = 0; rep < reps; ++rep) {
      const ProbeCell& cell = out.cells[g * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
      spectral.push_back(cell.spectral_deviation);
      min_eig.push_back(cell.min_eig_deviation);
      if (cell.incoherence) incoherence.push_back(*cell.incoherence);
      else ++summary.singular_count;
    }
    summary.spectral_deviation = summarize(spectral);
    summary.min_eig_deviation = summarize(min_eig);
    summary.incoherence = summarize(incoherence);
    out.summary.push_back(summary);
  }
  return out;
}

}  // namespace isingsel
