#include "isingsel/baselines.hpp"

#include "isingsel/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <tuple>
#include <utility>
#include <vector>

namespace isingsel {

double empirical_mutual_information(const SampleMatrix& data, int s, int t) {
  if (s == t) throw std::invalid_argument("mutual information: s and t must differ");
  if (s < 0 || t < 0 || s >= data.p() || t >= data.p())
    throw std::invalid_argument("mutual information: vertex out of range");
  if (s > t) std::swap(s, t);
  std::array<double, 4> counts{};
  for (Index i = 0; i < data.n(); ++i) counts[(data(i, s) > 0 ? 2 : 0) + (data(i, t) > 0 ? 1 : 0)] += 1.0;
  const double n = static_cast<double>(data.n());
  const std::array<double, 2> ms{(counts[0] + counts[1]) / n, (counts[2] + counts[3]) / n};
  const std::array<double, 2> mt{(counts[0] + counts[2]) / n, (counts[1] + counts[3]) / n};
  double mi = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double joint = counts[2 * a + b] / n;
      if (joint > 0.0) mi += joint * std::log(joint / (ms[a] * mt[b]));
    }
  }
  return std::max(mi, 0.0);
}

Matrix<double> mutual_information_weights(const SampleMatrix& data, unsigned jobs) {
  const int p = static_cast<int>(data.p());
  Matrix<double> weights = Matrix<double>::Zero(p, p);
  parallel_for(static_cast<std::size_t>(p), jobs, [&](std::size_t s) {
    for (int t = static_cast<int>(s) + 1; t < p; ++t)
      weights(static_cast<Index>(s), t) = empirical_mutual_information(data, static_cast<int>(s), t);
  });
  weights.triangularView<Eigen::StrictlyLower>() = weights.transpose();
  return weights;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

SignedEdgeSet chow_liu_forest(const SampleMatrix& data, int k, unsigned jobs) {
  const int p = static_cast<int>(data.p());
  if (k < 0 || k > p - 1) throw std::invalid_argument("chow_liu_forest: k must lie in [0, p-1]");
  SignedEdgeSet out(p);
  if (k == 0) return out;

  const Matrix<double> weights = mutual_information_weights(data, jobs);
  std::vector<std::tuple<double, int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(p) * static_cast<std::size_t>(p - 1) / 2);
  for (int s = 0; s < p; ++s)
    for (int t = s + 1; t < p; ++t) pairs.emplace_back(weights(s, t), s, t);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });

  const Matrix<double> x = data.as<double>();
  DisjointSets components(p);
  int added = 0;
  for (const auto& [mi, s, t] : pairs) {
    if (added == k) break;
    if (!components.unite(s, t)) continue;
    const double correlation = x.col(s).dot(x.col(t));
    out.set(s, t, correlation < 0.0 ? -1 : 1);
    ++added;
  }
  return out;
}

}  // namespace isingsel
