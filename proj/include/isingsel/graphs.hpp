#pragma once

#include "isingsel/common.hpp"
#include "isingsel/rng.hpp"

#include <numbers>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

namespace isingsel {

/// Unordered vertex pair stored as (min, max), 0-based.
struct Edge {
  int s = 0;
  int t = 0;

  Edge() = default;
  Edge(int a, int b) : s(a < b ? a : b), t(a < b ? b : a) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected simple graph on vertices 0..p-1.
class Topology {
 public:
  Topology() = default;
  /// Validates (no self-loops, no duplicates, indices in range) and
  /// computes the maximum degree. Edges are stored sorted.
  Topology(int p, std::vector<Edge> edges);

  [[nodiscard]] int p() const noexcept { return p_; }
  [[nodiscard]] int max_degree() const noexcept { return d_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] const std::vector<int>& neighbors(int v) const { return adjacency_.at(v); }
  [[nodiscard]] int degree(int v) const { return static_cast<int>(adjacency_.at(v).size()); }
  [[nodiscard]] bool has_edge(int s, int t) const;

 private:
  int p_ = 0;
  int d_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

/// Free-boundary lattice with rook (4-neighbor) adjacency; p = side^2.
Topology make_grid4(int side);

/// Free-boundary lattice with king (8-neighbor) adjacency; p = side^2.
Topology make_grid8(int side);

enum class StarSparsity { Linear, Logarithmic, Explicit };

/// Hub degree for the star families: ceil(0.1 p) for Linear,
/// ceil(log_base p) for Logarithmic (natural log unless overridden),
/// `explicit_degree` for Explicit.
int star_degree(int p, StarSparsity sparsity, int explicit_degree = 0,
                double log_base = std::numbers::e);

/// Vertex 0 is the hub, joined to vertices 1..d.
Topology make_star(int p, StarSparsity sparsity, int explicit_degree = 0,
                   double log_base = std::numbers::e);

enum class CouplingMode { Mixed, Positive };

/// Pairwise Ising model without node potentials.
class IsingModel {
 public:
  IsingModel() = default;
  /// `weights[k]` belongs to `topology.edges()[k]`; all must be nonzero.
  IsingModel(Topology topology, std::vector<double> weights);

  [[nodiscard]] const Topology& topology() const noexcept { return topology_; }
  [[nodiscard]] int p() const noexcept { return topology_.p(); }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
  /// theta*_{st}; zero for non-edges and s == t.
  [[nodiscard]] double weight(int s, int t) const;
  /// Smallest |theta*_{st}| over edges (0 for an empty graph).
  [[nodiscard]] double min_abs_weight() const;
  /// Dense symmetric p x p coupling matrix with zero diagonal.
  [[nodiscard]] Matrix<double> coupling_matrix() const;
  /// The (p-1)-vector theta*_{\r} in coef_index order.
  [[nodiscard]] Vector<double> node_parameters(int r) const;

 private:
  Topology topology_;
  std::vector<double> weights_;
  Matrix<double> dense_;
};

IsingModel assign_couplings(const Topology& topology, CouplingMode mode, double omega,
                            Rng& rng);

/// Sparse map from unordered pair to sign in {-1,+1}; absent pairs are 0.
class SignedEdgeSet {
 public:
  SignedEdgeSet() = default;
  explicit SignedEdgeSet(int p) : p_(p) {}

  [[nodiscard]] int p() const noexcept { return p_; }
  /// Sets the sign of (s,t); sign 0 removes the pair.
  void set(int s, int t, int sign);
  [[nodiscard]] int sign(int s, int t) const;
  [[nodiscard]] const std::map<Edge, int>& signs() const noexcept { return signs_; }
  [[nodiscard]] std::size_t size() const noexcept { return signs_.size(); }

  friend bool operator==(const SignedEdgeSet&, const SignedEdgeSet&) = default;

 private:
  int p_ = 0;
  std::map<Edge, int> signs_;
};

SignedEdgeSet signed_edges(const IsingModel& model);

/// Text format: `p <p> d <d>` then one `s t weight` line per edge,
/// 1-based vertices, 17 significant digits.
void write_model(std::ostream& out, const IsingModel& model);
IsingModel read_model(std::istream& in);

/// Text format: `p <p>` then one `s t sign` line per pair, 1-based.
void write_signed_edges(std::ostream& out, const SignedEdgeSet& edges);
SignedEdgeSet read_signed_edges(std::istream& in);

}  // namespace isingsel
