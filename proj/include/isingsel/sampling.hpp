#pragma once

#include "isingsel/common.hpp"
#include "isingsel/graphs.hpp"
#include "isingsel/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace isingsel {

/// n x p matrix of +/-1 spins, one observation per row.
class SampleMatrix {
 public:
  using Storage = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SampleMatrix() = default;
  SampleMatrix(Index n, Index p) : values_(Storage::Constant(n, p, 1)) {}
  /// Validates that every entry is exactly -1 or +1 and n >= 1.
  explicit SampleMatrix(Storage values);

  [[nodiscard]] Index n() const noexcept { return values_.rows(); }
  [[nodiscard]] Index p() const noexcept { return values_.cols(); }
  [[nodiscard]] int operator()(Index i, Index t) const { return values_(i, t); }
  void set(Index i, Index t, int spin) { values_(i, t) = static_cast<std::int8_t>(spin > 0 ? 1 : -1); }
  [[nodiscard]] const Storage& values() const noexcept { return values_; }

  template <typename Scalar>
  [[nodiscard]] Matrix<Scalar> as() const { return values_.cast<Scalar>(); }

  friend bool operator==(const SampleMatrix& a, const SampleMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Storage values_;
};

/// Exact distribution of an enumerable model. Configuration k encodes
/// x_t = +1 iff bit t of k is set.
struct DistributionTable {
  int p = 0;
  std::vector<double> probs;
  double log_partition = 0.0;

  [[nodiscard]] static int spin(std::uint64_t config, int t) noexcept {
    return (config >> t) & 1U ? 1 : -1;
  }
  [[nodiscard]] SampleMatrix configurations() const;
  /// E[X X^T] under the table.
  [[nodiscard]] Matrix<double> second_moments() const;
};

DistributionTable enumerate_distribution(const IsingModel& model);

/// P(X_r = +1 | x_rest) where `x_rest` lists the other p-1 spins in
/// coef_index order.
double conditional_prob(const IsingModel& model, int r, const Eigen::Ref<const Eigen::VectorXi>& x_rest);

/// P(X_r = value | x_rest) for value in {-1,+1}.
double conditional_prob_value(const IsingModel& model, int r, int value,
                              const Eigen::Ref<const Eigen::VectorXi>& x_rest);

SampleMatrix sample_exact_enum(const IsingModel& model, Index n, Rng& rng);

/// True when every edge shares one common vertex (the hub).
bool is_star(const Topology& topology, int* hub = nullptr);

/// Draws the hub uniformly, then each leaf from its conditional given the
/// hub. Isolated vertices are independent fair coins.
SampleMatrix sample_exact_star(const IsingModel& model, Index n, Rng& rng);

struct GibbsOptions {
  int burn_in_sweeps = 200;
  int spacing_sweeps = 5;
  bool random_scan = false;
};

/// Single-site Gibbs sampler from a uniform random start. A sweep updates
/// all p sites (index order unless random_scan). After burn-in, one row is
/// retained every max(1, spacing_sweeps) sweeps.
SampleMatrix gibbs_sample(const IsingModel& model, Index n, const GibbsOptions& options, Rng& rng);

/// Empirical E[X X^T].
Matrix<double> empirical_second_moments(const SampleMatrix& data);

/// Text format: `n <n> p <p>` then one row of space-separated -1/+1 per line.
void write_samples(std::ostream& out, const SampleMatrix& data);
SampleMatrix read_samples(std::istream& in);

}  // namespace isingsel
