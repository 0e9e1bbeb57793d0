#pragma once

#include "isingsel/common.hpp"
#include "isingsel/graphs.hpp"
#include "isingsel/logreg.hpp"
#include "isingsel/sampling.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace isingsel {

/// Neighbors of `center` tagged with the sign of the connecting weight.
struct SignedNeighborhood {
  int center = 0;
  std::map<int, int> members;  ///< vertex -> sign in {-1,+1}

  friend bool operator==(const SignedNeighborhood&, const SignedNeighborhood&) = default;
};

/// Support and signs of a fitted coefficient vector (exact zeros excluded).
SignedNeighborhood signed_neighborhood(const Vector<double>& theta_hat, int r);

/// The true signed neighborhood of r in an edge set.
SignedNeighborhood neighborhood_of(const SignedEdgeSet& edges, int r);

enum class CombineRule { And, Or, Nodewise };

struct GraphEstimate {
  int p = 0;
  CombineRule rule = CombineRule::And;
  std::vector<SignedNeighborhood> per_node;
  std::vector<RegressionSolution<double>> fits;
  std::optional<SignedEdgeSet> combined;  ///< absent for Nodewise
  int nonconverged = 0;

  [[nodiscard]] bool reliable() const noexcept { return nonconverged == 0; }
};

/// AND keeps a pair when both endpoints claim it with the same sign. OR
/// keeps it when either does; conflicting signs resolve to the larger
/// |theta_hat|, exact ties to the lower-index endpoint.
SignedEdgeSet combine_neighborhoods(int p, const std::vector<SignedNeighborhood>& per_node,
                                    const std::vector<Vector<double>>& thetas, CombineRule rule);

/// Fits every node regression at the given lambda. Non-convergence marks
/// the estimate unreliable but it is still returned.
GraphEstimate estimate_graph(const SampleMatrix& data, double lambda, CombineRule rule = CombineRule::And,
                             const SolverOptions& opts = {}, unsigned jobs = 1);

/// Every per-node signed neighborhood equals the truth's.
bool success(const std::vector<SignedNeighborhood>& per_node, const SignedEdgeSet& truth);
bool success(const GraphEstimate& estimate, const SignedEdgeSet& truth);

/// Pairs whose signed values differ (0 vs +/-1 and +1 vs -1 each count once).
int edge_disagreements(const SignedEdgeSet& estimate, const SignedEdgeSet& truth);

/// Pairs whose presence differs, ignoring signs.
int unsigned_disagreements(const SignedEdgeSet& estimate, const SignedEdgeSet& truth);

/// Signed edge set lines followed by a `nodes` section with one
/// `node <r> <t>:<sign> ...` line per vertex (1-based).
void write_estimate(std::ostream& out, const GraphEstimate& estimate);

}  // namespace isingsel
