#include "isingsel/selection.hpp"

#include "isingsel/parallel.hpp"

#include <cmath>
#include <ostream>
#include <set>

namespace isingsel {

SignedNeighborhood signed_neighborhood(const Vector<double>& theta_hat, int r) {
  SignedNeighborhood out;
  out.center = r;
  for (Index j = 0; j < theta_hat.size(); ++j)
    if (theta_hat(j) != 0.0) out.members[static_cast<int>(coef_vertex(r, j))] = theta_hat(j) > 0 ? 1 : -1;
  return out;
}

SignedNeighborhood neighborhood_of(const SignedEdgeSet& edges, int r) {
  SignedNeighborhood out;
  out.center = r;
  for (const auto& [e, sign] : edges.signs()) {
    if (e.s == r) out.members[e.t] = sign;
    else if (e.t == r) out.members[e.s] = sign;
  }
  return out;
}

SignedEdgeSet combine_neighborhoods(int p, const std::vector<SignedNeighborhood>& per_node,
                                    const std::vector<Vector<double>>& thetas, CombineRule rule) {
  if (static_cast<int>(per_node.size()) != p || static_cast<int>(thetas.size()) != p)
    throw std::invalid_argument("combine_neighborhoods: need one neighborhood per vertex");
  SignedEdgeSet out(p);
  if (rule == CombineRule::Nodewise) return out;
  std::set<Edge> claimed;
  for (int s = 0; s < p; ++s)
    for (const auto& member : per_node[s].members) claimed.emplace(s, member.first);
  auto claim = [&](int from, int to) {
    const auto it = per_node[from].members.find(to);
    return it == per_node[from].members.end() ? 0 : it->second;
  };
  for (const Edge& e : claimed) {
    const int sign_s = claim(e.s, e.t);
    const int sign_t = claim(e.t, e.s);
    if (rule == CombineRule::And) {
      if (sign_s == sign_t) out.set(e.s, e.t, sign_s);
      continue;
    }
    if (sign_s == 0 || sign_t == 0 || sign_s == sign_t) {
      out.set(e.s, e.t, sign_s != 0 ? sign_s : sign_t);
      continue;
    }
    const double mag_s = std::abs(thetas[e.s](coef_index(e.s, e.t)));
    const double mag_t = std::abs(thetas[e.t](coef_index(e.t, e.s)));
    // Ties go to the lower-index endpoint, which is e.s.
    out.set(e.s, e.t, mag_t > mag_s ? sign_t : sign_s);
  }
  return out;
}

GraphEstimate estimate_graph(const SampleMatrix& data, double lambda, CombineRule rule,
                             const SolverOptions& opts, unsigned jobs) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("estimate_graph: lambda must be >= 0");
  const int p = static_cast<int>(data.p());
  GraphEstimate out;
  out.p = p;
  out.rule = rule;
  out.fits.resize(static_cast<std::size_t>(p));
  parallel_for(static_cast<std::size_t>(p), jobs, [&](std::size_t r) {
    const auto design = NodeDesign<double>::from(data, static_cast<Index>(r), opts.fit_intercept);
    out.fits[r] = fit_l1_logistic(design, lambda, opts);
  });
  std::vector<Vector<double>> thetas;
  for (int r = 0; r < p; ++r) {
    out.per_node.push_back(signed_neighborhood(out.fits[r].theta, r));
    thetas.push_back(out.fits[r].theta);
    if (!out.fits[r].converged) ++out.nonconverged;
  }
  if (rule != CombineRule::Nodewise) out.combined = combine_neighborhoods(p, out.per_node, thetas, rule);
  return out;
}

bool success(const std::vector<SignedNeighborhood>& per_node, const SignedEdgeSet& truth) {
  if (static_cast<int>(per_node.size()) != truth.p())
    throw std::invalid_argument("success: vertex count mismatch");
  for (int r = 0; r < truth.p(); ++r)
    if (per_node[r].members != neighborhood_of(truth, r).members) return false;
  return true;
}

bool success(const GraphEstimate& estimate, const SignedEdgeSet& truth) {
  if (estimate.p != truth.p()) throw std::invalid_argument("success: vertex count mismatch");
  return success(estimate.per_node, truth);
}

namespace {

template <typename Differ>
int count_differences(const SignedEdgeSet& a, const SignedEdgeSet& b, Differ differ) {
  if (a.p() != b.p()) throw std::invalid_argument("edge_disagreements: vertex count mismatch");
  int count = 0;
  for (const auto& [e, sign] : a.signs())
    if (differ(sign, b.sign(e.s, e.t))) ++count;
  for (const auto& [e, sign] : b.signs())
    if (a.sign(e.s, e.t) == 0) ++count;
  return count;
}

}  // namespace

int edge_disagreements(const SignedEdgeSet& estimate, const SignedEdgeSet& truth) {
  return count_differences(estimate, truth, [](int x, int y) { return x != y; });
}

int unsigned_disagreements(const SignedEdgeSet& estimate, const SignedEdgeSet& truth) {
  return count_differences(estimate, truth, [](int, int y) { return y == 0; });
}

void write_estimate(std::ostream& out, const GraphEstimate& estimate) {
  write_signed_edges(out, estimate.combined.value_or(SignedEdgeSet(estimate.p)));
  out << "nodes\n";
  for (const SignedNeighborhood& nbhd : estimate.per_node) {
    out << "node " << nbhd.center + 1;
    for (const auto& [t, sign] : nbhd.members) out << ' ' << t + 1 << ':' << (sign > 0 ? "+1" : "-1");
    out << '\n';
  }
}

}  // namespace isingsel
