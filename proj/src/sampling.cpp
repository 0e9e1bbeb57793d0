#include "isingsel/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace isingsel {

namespace {

/// exp(2 v a) / (exp(2 v a) + 1) evaluated without overflow.
double logistic_2(double signed_field) {
  const double z = 2.0 * signed_field;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_enumerable(int p) {
  if (p > kEnumerationCap)
    throw ResourceLimitError("enumeration over " + std::to_string(p) +
                             " variables exceeds the cap of " +
                             std::to_string(kEnumerationCap));
}

struct WeightedNeighbors {
  std::vector<std::vector<std::pair<int, double>>> of;

  explicit WeightedNeighbors(const IsingModel& model) : of(static_cast<std::size_t>(model.p())) {
    const auto& edges = model.topology().edges();
    for (std::size_t k = 0; k < edges.size(); ++k) {
      of[edges[k].s].emplace_back(edges[k].t, model.weights()[k]);
      of[edges[k].t].emplace_back(edges[k].s, model.weights()[k]);
    }
  }
};

}  // namespace

SampleMatrix::SampleMatrix(Storage values) : values_(std::move(values)) {
  if (values_.rows() < 1) throw std::invalid_argument("sample matrix: need at least one row");
  if ((values_.array() != 1 && values_.array() != -1).any())
    throw std::invalid_argument("sample matrix: entries must be -1 or +1");
}

SampleMatrix DistributionTable::configurations() const {
  const std::uint64_t count = probs.size();
  SampleMatrix::Storage values(static_cast<Index>(count), p);
  for (std::uint64_t k = 0; k < count; ++k)
    for (int t = 0; t < p; ++t) values(static_cast<Index>(k), t) = static_cast<std::int8_t>(spin(k, t));
  return SampleMatrix(std::move(values));
}

Matrix<double> DistributionTable::second_moments() const {
  Matrix<double> m = Matrix<double>::Zero(p, p);
  Vector<double> x(p);
  for (std::uint64_t k = 0; k < probs.size(); ++k) {
    for (int t = 0; t < p; ++t) x(t) = spin(k, t);
    m.noalias() += probs[k] * x * x.transpose();
  }
  return m;
}

DistributionTable enumerate_distribution(const IsingModel& model) {
  const int p = model.p();
  require_enumerable(p);
  const std::uint64_t count = std::uint64_t{1} << p;
  const auto& edges = model.topology().edges();
  const auto& weights = model.weights();

  DistributionTable table;
  table.p = p;
  table.probs.resize(count);
  double max_energy = -std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < count; ++k) {
    double energy = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e)
      energy += weights[e] * DistributionTable::spin(k, edges[e].s) *
                DistributionTable::spin(k, edges[e].t);
    table.probs[k] = energy;
    max_energy = std::max(max_energy, energy);
  }
  double total = 0.0;
  for (double& value : table.probs) {
    value = std::exp(value - max_energy);
    total += value;
  }
  for (double& value : table.probs) value /= total;
  table.log_partition = max_energy + std::log(total);
  return table;
}

double conditional_prob_value(const IsingModel& model, int r, int value,
                              const Eigen::Ref<const Eigen::VectorXi>& x_rest) {
  if (r < 0 || r >= model.p()) throw std::invalid_argument("conditional_prob: vertex out of range");
  if (x_rest.size() != model.p() - 1)
    throw std::invalid_argument("conditional_prob: expected p-1 conditioning spins");
  double field = 0.0;
  for (int t : model.topology().neighbors(r))
    field += model.weight(r, t) * x_rest(coef_index(r, t));
  return logistic_2(value > 0 ? field : -field);
}

double conditional_prob(const IsingModel& model, int r,
                        const Eigen::Ref<const Eigen::VectorXi>& x_rest) {
  return conditional_prob_value(model, r, +1, x_rest);
}

SampleMatrix sample_exact_enum(const IsingModel& model, Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_exact_enum: n must be >= 1");
  const DistributionTable table = enumerate_distribution(model);
  std::vector<double> cdf(table.probs.size());
  std::partial_sum(table.probs.begin(), table.probs.end(), cdf.begin());
  SampleMatrix out(n, table.p);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto config = static_cast<std::uint64_t>(it - cdf.begin());
    for (int t = 0; t < table.p; ++t) out.set(i, t, DistributionTable::spin(config, t));
  }
  return out;
}

bool is_star(const Topology& topology, int* hub) {
  const auto& edges = topology.edges();
  int center = 0;
  if (!edges.empty()) {
    const Edge& first = edges.front();
    const bool s_common = std::all_of(edges.begin(), edges.end(),
                                      [&](const Edge& e) { return e.s == first.s || e.t == first.s; });
    const bool t_common = std::all_of(edges.begin(), edges.end(),
                                      [&](const Edge& e) { return e.s == first.t || e.t == first.t; });
    if (!s_common && !t_common) return false;
    center = s_common ? first.s : first.t;
  }
  if (hub != nullptr) *hub = center;
  return true;
}

SampleMatrix sample_exact_star(const IsingModel& model, Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_exact_star: n must be >= 1");
  int hub = 0;
  if (!is_star(model.topology(), &hub))
    throw std::invalid_argument("sample_exact_star: topology is not a star");
  const int p = model.p();
  const auto& leaves = model.topology().neighbors(hub);
  std::vector<double> leaf_plus(leaves.size());
  for (std::size_t k = 0; k < leaves.size(); ++k)
    leaf_plus[k] = logistic_2(model.weight(hub, leaves[k]));

  SampleMatrix out(n, p);
  for (Index i = 0; i < n; ++i) {
    for (int t = 0; t < p; ++t) out.set(i, t, rng.sign());
    const int hub_spin = out(i, hub);
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      // P(x_leaf = hub_spin | hub) = logistic(2 theta)
      const bool agree = rng.bernoulli(leaf_plus[k]);
      out.set(i, leaves[k], agree ? hub_spin : -hub_spin);
    }
  }
  return out;
}

SampleMatrix gibbs_sample(const IsingModel& model, Index n, const GibbsOptions& options, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gibbs_sample: n must be >= 1");
  if (options.burn_in_sweeps < 0 || options.spacing_sweeps < 0)
    throw std::invalid_argument("gibbs_sample: sweep counts must be nonnegative");
  const int p = model.p();
  const WeightedNeighbors nbrs(model);
  std::vector<int> state(static_cast<std::size_t>(p));
  for (int& x : state) x = rng.sign();
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);

  auto sweep = [&] {
    if (options.random_scan) std::shuffle(order.begin(), order.end(), rng);
    for (int v : order) {
      double field = 0.0;
      for (const auto& [t, w] : nbrs.of[v]) field += w * state[t];
      state[v] = rng.bernoulli(logistic_2(field)) ? 1 : -1;
    }
  };

  for (int s = 0; s < options.burn_in_sweeps; ++s) sweep();
  const int spacing = std::max(1, options.spacing_sweeps);
  SampleMatrix out(n, p);
  for (Index i = 0; i < n; ++i) {
    for (int s = 0; s < spacing; ++s) sweep();
    for (int t = 0; t < p; ++t) out.set(i, t, state[t]);
  }
  return out;
}

Matrix<double> empirical_second_moments(const SampleMatrix& data) {
  const Matrix<double> x = data.as<double>();
  Matrix<double> m = Matrix<double>::Zero(x.cols(), x.cols());
  m.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(x.rows()));
  return m.selfadjointView<Eigen::Lower>();
}

void write_samples(std::ostream& out, const SampleMatrix& data) {
  out << "n " << data.n() << " p " << data.p() << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    for (Index t = 0; t < data.p(); ++t) out << (t == 0 ? "" : " ") << data(i, t);
    out << '\n';
  }
}

SampleMatrix read_samples(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  std::istringstream header(line);
  std::string n_tag, p_tag;
  Index n = 0, p = 0;
  if (!(header >> n_tag >> n >> p_tag >> p) || n_tag != "n" || p_tag != "p" || n < 1 || p < 1)
    throw std::invalid_argument("read_samples: expected header 'n <n> p <p>'");
  SampleMatrix::Storage values(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index t = 0; t < p; ++t) {
      int spin = 0;
      if (!(in >> spin)) throw std::invalid_argument("read_samples: truncated data at row " + std::to_string(i + 1));
      if (spin != 1 && spin != -1)
        throw std::invalid_argument("read_samples: entry at row " + std::to_string(i + 1) +
                                    " is not -1/+1");
      values(i, t) = static_cast<std::int8_t>(spin);
    }
  }
  return SampleMatrix(std::move(values));
}

}  // namespace isingsel
