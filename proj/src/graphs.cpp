#include "isingsel/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace isingsel {

Topology::Topology(int p, std::vector<Edge> edges) : p_(p), edges_(std::move(edges)) {
  if (p < 2) throw std::invalid_argument("topology: at least two vertices required");
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw std::invalid_argument("topology: duplicate edge");
  adjacency_.assign(static_cast<std::size_t>(p), {});
  for (const Edge& e : edges_) {
    if (e.s == e.t) throw std::invalid_argument("topology: self-loop");
    if (e.s < 0 || e.t >= p) throw std::invalid_argument("topology: vertex out of range");
    adjacency_[e.s].push_back(e.t);
    adjacency_[e.t].push_back(e.s);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    d_ = std::max(d_, static_cast<int>(nbrs.size()));
  }
}

bool Topology::has_edge(int s, int t) const {
  if (s == t) return false;
  return std::binary_search(edges_.begin(), edges_.end(), Edge(s, t));
}

namespace {

Topology lattice(int side, bool diagonals) {
  std::vector<Edge> edges;
  auto id = [side](int row, int col) { return row * side + col; };
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      if (col + 1 < side) edges.emplace_back(id(row, col), id(row, col + 1));
      if (row + 1 < side) edges.emplace_back(id(row, col), id(row + 1, col));
      if (diagonals && row + 1 < side) {
        if (col + 1 < side) edges.emplace_back(id(row, col), id(row + 1, col + 1));
        if (col > 0) edges.emplace_back(id(row, col), id(row + 1, col - 1));
      }
    }
  }
  return Topology(side * side, std::move(edges));
}

}  // namespace

Topology make_grid4(int side) {
  if (side < 2) throw std::invalid_argument("make_grid4: side must be >= 2");
  return lattice(side, false);
}

Topology make_grid8(int side) {
  if (side < 3) throw std::invalid_argument("make_grid8: side must be >= 3");
  return lattice(side, true);
}

int star_degree(int p, StarSparsity sparsity, int explicit_degree, double log_base) {
  switch (sparsity) {
    case StarSparsity::Linear:
      return static_cast<int>(std::ceil(0.1 * p));
    case StarSparsity::Logarithmic:
      if (!(log_base > 1.0)) throw std::invalid_argument("star: log base must exceed 1");
      return static_cast<int>(std::ceil(std::log(static_cast<double>(p)) / std::log(log_base)));
    case StarSparsity::Explicit:
      return explicit_degree;
  }
  return 0;
}

Topology make_star(int p, StarSparsity sparsity, int explicit_degree, double log_base) {
  const int d = star_degree(p, sparsity, explicit_degree, log_base);
  if (d < 1 || d > p - 1)
    throw std::invalid_argument("make_star: hub degree " + std::to_string(d) +
                                " outside [1, p-1]");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(d));
  for (int leaf = 1; leaf <= d; ++leaf) edges.emplace_back(0, leaf);
  return Topology(p, std::move(edges));
}

IsingModel::IsingModel(Topology topology, std::vector<double> weights)
    : topology_(std::move(topology)), weights_(std::move(weights)) {
  if (weights_.size() != topology_.edges().size())
    throw std::invalid_argument("ising model: one weight per edge required");
  dense_ = Matrix<double>::Zero(topology_.p(), topology_.p());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double w = weights_[k];
    if (w == 0.0 || !std::isfinite(w))
      throw std::invalid_argument("ising model: edge weights must be finite and nonzero");
    const Edge& e = topology_.edges()[k];
    dense_(e.s, e.t) = w;
    dense_(e.t, e.s) = w;
  }
}

double IsingModel::weight(int s, int t) const { return dense_(s, t); }

double IsingModel::min_abs_weight() const {
  double out = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k)
    out = k == 0 ? std::abs(weights_[k]) : std::min(out, std::abs(weights_[k]));
  return out;
}

Matrix<double> IsingModel::coupling_matrix() const { return dense_; }

Vector<double> IsingModel::node_parameters(int r) const {
  Vector<double> theta(p() - 1);
  for (Index j = 0; j < theta.size(); ++j) theta(j) = dense_(r, coef_vertex(r, j));
  return theta;
}

IsingModel assign_couplings(const Topology& topology, CouplingMode mode, double omega,
                            Rng& rng) {
  if (!(omega > 0.0)) throw std::invalid_argument("assign_couplings: omega must be positive");
  std::vector<double> weights(topology.edges().size(), omega);
  if (mode == CouplingMode::Mixed)
    for (double& w : weights) w *= rng.sign();
  return IsingModel(topology, std::move(weights));
}

void SignedEdgeSet::set(int s, int t, int sign) {
  if (s == t || s < 0 || t < 0 || s >= p_ || t >= p_)
    throw std::invalid_argument("signed edge set: invalid pair");
  if (sign == 0) {
    signs_.erase(Edge(s, t));
    return;
  }
  signs_[Edge(s, t)] = sign > 0 ? 1 : -1;
}

int SignedEdgeSet::sign(int s, int t) const {
  const auto it = signs_.find(Edge(s, t));
  return it == signs_.end() ? 0 : it->second;
}

SignedEdgeSet signed_edges(const IsingModel& model) {
  SignedEdgeSet out(model.p());
  const auto& edges = model.topology().edges();
  for (std::size_t k = 0; k < edges.size(); ++k)
    out.set(edges[k].s, edges[k].t, model.weights()[k] > 0 ? 1 : -1);
  return out;
}

namespace {

std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return line;
  }
  return {};
}

}  // namespace

void write_model(std::ostream& out, const IsingModel& model) {
  out << "p " << model.p() << " d " << model.topology().max_degree() << '\n';
  const auto& edges = model.topology().edges();
  out << std::setprecision(17);
  for (std::size_t k = 0; k < edges.size(); ++k)
    out << edges[k].s + 1 << ' ' << edges[k].t + 1 << ' ' << model.weights()[k] << '\n';
}

IsingModel read_model(std::istream& in) {
  std::istringstream header(next_content_line(in));
  std::string p_tag, d_tag;
  int p = 0, d = -1;
  if (!(header >> p_tag >> p >> d_tag >> d) || p_tag != "p" || d_tag != "d")
    throw std::invalid_argument("read_model: expected header 'p <p> d <d>'");
  std::vector<Edge> edges;
  std::vector<std::pair<Edge, double>> weighted;
  for (std::string line = next_content_line(in); !line.empty(); line = next_content_line(in)) {
    std::istringstream row(line);
    int s = 0, t = 0;
    double w = 0.0;
    if (!(row >> s >> t >> w)) throw std::invalid_argument("read_model: bad edge line: " + line);
    if (s < 1 || t < 1 || s > p || t > p)
      throw std::invalid_argument("read_model: vertex out of range: " + line);
    weighted.emplace_back(Edge(s - 1, t - 1), w);
  }
  std::sort(weighted.begin(), weighted.end());
  std::vector<double> weights;
  for (const auto& [e, w] : weighted) {
    edges.push_back(e);
    weights.push_back(w);
  }
  Topology topology(p, std::move(edges));
  if (topology.max_degree() != d)
    throw std::invalid_argument("read_model: header degree " + std::to_string(d) +
                                " disagrees with edges (" +
                                std::to_string(topology.max_degree()) + ")");
  return IsingModel(std::move(topology), std::move(weights));
}

void write_signed_edges(std::ostream& out, const SignedEdgeSet& edges) {
  out << "p " << edges.p() << '\n';
  for (const auto& [e, sign] : edges.signs())
    out << e.s + 1 << ' ' << e.t + 1 << ' ' << (sign > 0 ? "+1" : "-1") << '\n';
}

SignedEdgeSet read_signed_edges(std::istream& in) {
  std::istringstream header(next_content_line(in));
  std::string tag;
  int p = 0;
  if (!(header >> tag >> p) || tag != "p" || p < 1)
    throw std::invalid_argument("read_signed_edges: expected header 'p <p>'");
  SignedEdgeSet out(p);
  for (std::string line = next_content_line(in); !line.empty(); line = next_content_line(in)) {
    std::istringstream row(line);
    int s = 0, t = 0, sign = 0;
    if (!(row >> s >> t >> sign) || (sign != 1 && sign != -1))
      throw std::invalid_argument("read_signed_edges: bad line: " + line);
    out.set(s - 1, t - 1, sign);
  }
  return out;
}

}  // namespace isingsel
