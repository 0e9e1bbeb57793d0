#include "isingsel/harness.hpp"

#include "isingsel/baselines.hpp"
#include "isingsel/fisher.hpp"
#include "isingsel/parallel.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace isingsel {

std::string to_string(GraphClass graph_class) {
  switch (graph_class) {
    case GraphClass::Grid4: return "grid4";
    case GraphClass::Grid8: return "grid8";
    case GraphClass::StarLinear: return "star_linear";
    case GraphClass::StarLog: return "star_log";
  }
  return "?";
}

std::string to_string(SamplerKind sampler) { return sampler == SamplerKind::Exact ? "exact" : "gibbs"; }

std::string to_string(CouplingMode coupling) {
  return coupling == CouplingMode::Mixed ? "mixed" : "positive";
}

std::string to_string(CombineRule rule) {
  switch (rule) {
    case CombineRule::And: return "and";
    case CombineRule::Or: return "or";
    case CombineRule::Nodewise: return "nodewise";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (p_list.empty()) throw std::invalid_argument("config: p_list is empty");
  for (int p : p_list)
    if (p < 2) throw std::invalid_argument("config: every p must be >= 2");
  if (beta_grid.empty()) throw std::invalid_argument("config: beta_grid is empty");
  for (std::size_t k = 0; k < beta_grid.size(); ++k) {
    if (!(beta_grid[k] > 0.0)) throw std::invalid_argument("config: beta values must be positive");
    if (k > 0 && !(beta_grid[k] > beta_grid[k - 1]))
      throw std::invalid_argument("config: beta_grid must be strictly increasing");
  }
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(lambda_scale > 0.0)) throw std::invalid_argument("config: lambda_scale must be positive");
  if (!(omega > 0.0)) throw std::invalid_argument("config: omega must be positive");
  if (!run_l1 && !run_chow_liu) throw std::invalid_argument("config: no methods selected");
  if (gibbs.burn_in_sweeps < 0 || gibbs.spacing_sweeps < 0)
    throw std::invalid_argument("config: Gibbs sweep counts must be nonnegative");
  if (!(solver.kkt_tol > 0.0) || solver.max_iters < 1 ||
      !(solver.backtrack_factor > 0.0 && solver.backtrack_factor < 1.0))
    throw std::invalid_argument("config: invalid solver options");
}

ExperimentConfig default_config(GraphClass graph_class) {
  ExperimentConfig config;
  config.graph_class = graph_class;
  switch (graph_class) {
    case GraphClass::Grid4:
      config.omega = 0.5;
      config.sampler = SamplerKind::Gibbs;
      config.beta_grid = {0.2, 0.6, 1.0, 1.4, 1.8, 2.2};
      config.lambda_scale = 1.5;
      break;
    case GraphClass::Grid8:
      config.omega = 0.25;
      config.sampler = SamplerKind::Gibbs;
      config.beta_grid = {0.6, 1.4, 2.2, 3.0, 4.0, 5.0};
      config.lambda_scale = 1.5;
      break;
    case GraphClass::StarLinear:
    case GraphClass::StarLog:
      config.omega = 0.25;
      config.coupling = CouplingMode::Positive;
      config.sampler = SamplerKind::Exact;
      config.beta_grid = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
      config.lambda_scale = 2.0;
      config.p_list = {64, 100, 144};
      break;
  }
  return config;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void bad_value(const std::string& key, const Entry& entry, const std::string& why) {
  throw std::invalid_argument("config line " + std::to_string(entry.line) + ": " + key + " = '" +
                              entry.value + "': " + why);
}

double to_double(const std::string& key, const Entry& entry, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) bad_value(key, entry, "not a number");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, entry, "not a number");
  }
}

long long to_integer(const std::string& key, const Entry& entry, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) bad_value(key, entry, "not an integer");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, entry, "not an integer");
  }
}

bool to_bool(const std::string& key, const Entry& entry) {
  if (entry.value == "true" || entry.value == "1") return true;
  if (entry.value == "false" || entry.value == "0") return false;
  bad_value(key, entry, "expected true/false");
}

GraphClass parse_graph_class(const std::string& key, const Entry& entry) {
  if (entry.value == "grid4") return GraphClass::Grid4;
  if (entry.value == "grid8") return GraphClass::Grid8;
  if (entry.value == "star_linear") return GraphClass::StarLinear;
  if (entry.value == "star_log") return GraphClass::StarLog;
  bad_value(key, entry, "expected grid4, grid8, star_linear or star_log");
}

const std::map<std::string, std::vector<std::string>>& allowed_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"experiment",
       {"graph_class", "p_list", "coupling", "omega", "beta_grid", "trials", "lambda_scale", "base_seed",
        "methods", "combine", "star_log_base"}},
      {"sampler", {"sampler", "burn_in_sweeps", "spacing_sweeps", "random_scan"}},
      {"solver", {"kkt_tol", "max_iters", "backtrack_factor"}},
  };
  return keys;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string section = "experiment";
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!allowed_keys().count(section))
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = allowed_keys().at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + key +
                                  "' in [" + section + "]");
    if (entries.count(key))
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    entries[key] = {value, line_no};
  }

  GraphClass graph_class = GraphClass::Grid4;
  if (const auto it = entries.find("graph_class"); it != entries.end())
    graph_class = parse_graph_class(it->first, it->second);
  ExperimentConfig config = default_config(graph_class);

  for (const auto& [key, entry] : entries) {
    if (key == "graph_class") continue;
    if (key == "p_list") {
      config.p_list.clear();
      for (const auto& item : split_list(entry.value))
        config.p_list.push_back(static_cast<int>(to_integer(key, entry, item)));
    } else if (key == "beta_grid") {
      config.beta_grid.clear();
      for (const auto& item : split_list(entry.value)) config.beta_grid.push_back(to_double(key, entry, item));
    } else if (key == "coupling") {
      if (entry.value == "mixed") config.coupling = CouplingMode::Mixed;
      else if (entry.value == "positive") config.coupling = CouplingMode::Positive;
      else bad_value(key, entry, "expected mixed or positive");
    } else if (key == "omega") {
      config.omega = to_double(key, entry, entry.value);
    } else if (key == "trials") {
      config.trials = static_cast<int>(to_integer(key, entry, entry.value));
    } else if (key == "lambda_scale") {
      config.lambda_scale = to_double(key, entry, entry.value);
    } else if (key == "base_seed") {
      config.base_seed = static_cast<std::uint64_t>(to_integer(key, entry, entry.value));
    } else if (key == "methods") {
      config.run_l1 = config.run_chow_liu = false;
      for (const auto& item : split_list(entry.value)) {
        if (item == "L1") config.run_l1 = true;
        else if (item == "CL") config.run_chow_liu = true;
        else bad_value(key, entry, "methods are L1 and CL");
      }
    } else if (key == "combine") {
      if (entry.value == "and") config.combine = CombineRule::And;
      else if (entry.value == "or") config.combine = CombineRule::Or;
      else if (entry.value == "nodewise") config.combine = CombineRule::Nodewise;
      else bad_value(key, entry, "expected and, or or nodewise");
    } else if (key == "star_log_base") {
      config.star_log_base = entry.value == "e" ? std::numbers::e : to_double(key, entry, entry.value);
    } else if (key == "sampler") {
      if (entry.value == "exact") config.sampler = SamplerKind::Exact;
      else if (entry.value == "gibbs") config.sampler = SamplerKind::Gibbs;
      else bad_value(key, entry, "expected exact or gibbs");
    } else if (key == "burn_in_sweeps") {
      config.gibbs.burn_in_sweeps = static_cast<int>(to_integer(key, entry, entry.value));
    } else if (key == "spacing_sweeps") {
      config.gibbs.spacing_sweeps = static_cast<int>(to_integer(key, entry, entry.value));
    } else if (key == "random_scan") {
      config.gibbs.random_scan = to_bool(key, entry);
    } else if (key == "kkt_tol") {
      config.solver.kkt_tol = to_double(key, entry, entry.value);
    } else if (key == "max_iters") {
      config.solver.max_iters = static_cast<int>(to_integer(key, entry, entry.value));
    } else if (key == "backtrack_factor") {
      config.solver.backtrack_factor = to_double(key, entry, entry.value);
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  auto join = [](const auto& values) {
    std::ostringstream ss;
    ss.precision(17);
    for (std::size_t k = 0; k < values.size(); ++k) ss << (k ? ", " : "") << values[k];
    return ss.str();
  };
  std::ostringstream methods;
  if (config.run_l1) methods << "L1";
  if (config.run_chow_liu) methods << (config.run_l1 ? ", " : "") << "CL";
  const auto precision = out.precision(17);
  out << "[experiment]\n"
      << "graph_class = " << to_string(config.graph_class) << '\n'
      << "p_list = " << join(config.p_list) << '\n'
      << "coupling = " << to_string(config.coupling) << '\n'
      << "omega = " << config.omega << '\n'
      << "beta_grid = " << join(config.beta_grid) << '\n'
      << "trials = " << config.trials << '\n'
      << "lambda_scale = " << config.lambda_scale << '\n'
      << "base_seed = " << config.base_seed << '\n'
      << "methods = " << methods.str() << '\n'
      << "combine = " << to_string(config.combine) << '\n'
      << "star_log_base = " << config.star_log_base << '\n'
      << "\n[sampler]\n"
      << "sampler = " << to_string(config.sampler) << '\n'
      << "burn_in_sweeps = " << config.gibbs.burn_in_sweeps << '\n'
      << "spacing_sweeps = " << config.gibbs.spacing_sweeps << '\n'
      << "random_scan = " << (config.gibbs.random_scan ? "true" : "false") << '\n'
      << "\n[solver]\n"
      << "kkt_tol = " << config.solver.kkt_tol << '\n'
      << "max_iters = " << config.solver.max_iters << '\n'
      << "backtrack_factor = " << config.solver.backtrack_factor << '\n';
  out.precision(precision);
}

Topology make_topology(GraphClass graph_class, int p, double star_log_base) {
  switch (graph_class) {
    case GraphClass::Grid4:
    case GraphClass::Grid8: {
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
      if (side * side != p)
        throw std::invalid_argument("lattice graphs need a perfect-square p, got " + std::to_string(p));
      return graph_class == GraphClass::Grid4 ? make_grid4(side) : make_grid8(side);
    }
    case GraphClass::StarLinear:
      return make_star(p, StarSparsity::Linear);
    case GraphClass::StarLog:
      return make_star(p, StarSparsity::Logarithmic, 0, star_log_base);
  }
  throw std::invalid_argument("unknown graph class");
}

Index sample_size(double beta, int d, int p) {
  const double raw = 10.0 * beta * static_cast<double>(d) * std::log(static_cast<double>(p));
  return std::max<Index>(1, static_cast<Index>(std::ceil(raw)));
}

std::uint64_t cell_seed(std::uint64_t base_seed, int p, double beta, int trial) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h, static_cast<std::uint64_t>(p));
  h = mix64(h, std::bit_cast<std::uint64_t>(beta));
  return mix64(h, static_cast<std::uint64_t>(trial));
}

TrialResult run_trial(const ExperimentConfig& config, int p, double beta, int trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult result;
  result.p = p;
  result.beta = beta;
  result.trial = trial;
  result.seed = cell_seed(config.base_seed, p, beta, trial);
  try {
    const Topology topology = make_topology(config.graph_class, p, config.star_log_base);
    result.d = topology.max_degree();
    result.n = sample_size(beta, result.d, p);
    const Rng root(result.seed);
    Rng model_rng = root.split(0);
    Rng sample_rng = root.split(1);
    const IsingModel model = assign_couplings(topology, config.coupling, config.omega, model_rng);
    const SignedEdgeSet truth = signed_edges(model);
    SampleMatrix data;
    if (config.sampler == SamplerKind::Gibbs) data = gibbs_sample(model, result.n, config.gibbs, sample_rng);
    else if (is_star(topology)) data = sample_exact_star(model, result.n, sample_rng);
    else data = sample_exact_enum(model, result.n, sample_rng);
    result.lambda = config.lambda_scale * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(result.n));

    if (config.run_l1) {
      const GraphEstimate estimate = estimate_graph(data, result.lambda, config.combine, config.solver);
      result.success = success(estimate, truth);
      // Disagreement needs a single graph; Nodewise runs are scored with AND.
      SignedEdgeSet combined(p);
      if (estimate.combined) {
        combined = *estimate.combined;
      } else {
        std::vector<Vector<double>> thetas;
        for (const auto& fit : estimate.fits) thetas.push_back(fit.theta);
        combined = combine_neighborhoods(p, estimate.per_node, thetas, CombineRule::And);
      }
      result.l1_disagree_signed = edge_disagreements(combined, truth);
      result.l1_disagree_unsigned = unsigned_disagreements(combined, truth);
      result.nonconverged = estimate.nonconverged;
      for (int r = 0; r < p; ++r) {
        const auto& fit = estimate.fits[r];
        result.max_kkt = std::max(result.max_kkt, static_cast<double>(fit.kkt_residual));
        for (Index j : complement(support_of(model, r), fit.theta.size()))
          result.max_dual_inf = std::max(result.max_dual_inf, std::abs(fit.zhat(j)));
        if (!fit.converged) continue;
        for (Index j = 0; j < fit.theta.size(); ++j) {
          result.max_abs_zhat = std::max(result.max_abs_zhat, std::abs(fit.zhat(j)));
          if (fit.theta(j) != 0.0)
            result.max_support_sign_gap = std::max(
                result.max_support_sign_gap, std::abs(fit.zhat(j) - (fit.theta(j) > 0 ? 1.0 : -1.0)));
        }
      }
      result.strict_dual_feasible = result.max_dual_inf < 1.0;
    }
    if (config.run_chow_liu) {
      const int k = std::min<int>(static_cast<int>(topology.edges().size()), p - 1);
      const SignedEdgeSet forest = chow_liu_forest(data, k);
      result.cl_disagree_signed = edge_disagreements(forest, truth);
      result.cl_disagree_unsigned = unsigned_disagreements(forest, truth);
    }
  } catch (const std::exception& e) {
    result.error = e.what();
    result.success = false;
  }
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

double mean_of(const std::vector<TrialResult>& group, int TrialResult::*field) {
  double total = 0.0;
  int count = 0;
  for (const auto& t : group) {
    if (t.*field < 0) continue;
    total += t.*field;
    ++count;
  }
  return count ? total / count : std::nan("");
}

}  // namespace

std::vector<CellSummary> aggregate(const std::vector<TrialResult>& trials) {
  std::vector<CellSummary> out;
  std::size_t begin = 0;
  while (begin < trials.size()) {
    std::size_t end = begin;
    while (end < trials.size() && trials[end].p == trials[begin].p && trials[end].beta == trials[begin].beta) ++end;
    const std::vector<TrialResult> group(trials.begin() + static_cast<std::ptrdiff_t>(begin),
                                         trials.begin() + static_cast<std::ptrdiff_t>(end));
    CellSummary cell;
    cell.p = group.front().p;
    cell.d = group.front().d;
    cell.beta = group.front().beta;
    cell.n = group.front().n;
    cell.trials = static_cast<int>(group.size());
    int successes = 0, strict = 0;
    for (const auto& t : group) {
      if (t.success) {
        ++successes;
        if (t.strict_dual_feasible) ++strict;
      }
      cell.mean_max_kkt += t.max_kkt / cell.trials;
      cell.mean_max_dual_inf += t.max_dual_inf / cell.trials;
      cell.nonconverged += t.nonconverged;
      if (t.failed()) ++cell.failures;
    }
    cell.success_rate = static_cast<double>(successes) / cell.trials;
    if (successes > 0) cell.strict_dual_fraction = static_cast<double>(strict) / successes;
    cell.l1_disagree_signed = mean_of(group, &TrialResult::l1_disagree_signed);
    cell.l1_disagree_unsigned = mean_of(group, &TrialResult::l1_disagree_unsigned);
    cell.cl_disagree_signed = mean_of(group, &TrialResult::cl_disagree_signed);
    cell.cl_disagree_unsigned = mean_of(group, &TrialResult::cl_disagree_unsigned);
    out.push_back(cell);
    begin = end;
  }
  return out;
}

SweepResult run_sweep(const ExperimentConfig& config, unsigned jobs) {
  config.validate();
  std::vector<int> p_sorted = config.p_list;
  std::sort(p_sorted.begin(), p_sorted.end());
  p_sorted.erase(std::unique(p_sorted.begin(), p_sorted.end()), p_sorted.end());

  struct Cell {
    int p;
    double beta;
    int trial;
  };
  std::vector<Cell> cells;
  for (int p : p_sorted)
    for (double beta : config.beta_grid)
      for (int trial = 0; trial < config.trials; ++trial) cells.push_back({p, beta, trial});

  SweepResult out;
  out.trials.resize(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t k) {
    out.trials[k] = run_trial(config, cells[k].p, cells[k].beta, cells[k].trial);
  });
  out.summary = aggregate(out.trials);
  return out;
}

const CellSummary& SweepResult::cell(int p, double beta) const {
  for (const auto& c : summary)
    if (c.p == p && c.beta == beta) return c;
  throw std::out_of_range("sweep has no cell for p=" + std::to_string(p) + " beta=" + format_g6(beta));
}

std::string format_g6(double value) {
  if (std::isnan(value)) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

namespace {

std::string count_field(int value) { return value < 0 ? std::string() : std::to_string(value); }

}  // namespace

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
  out << kTrialHeader << '\n';
  for (const auto& t : trials) {
    out << t.p << ',' << t.d << ',' << format_g6(t.beta) << ',' << t.n << ',' << t.trial << ',' << t.seed
        << ',' << (t.success ? 1 : 0) << ',' << count_field(t.l1_disagree_signed) << ','
        << count_field(t.l1_disagree_unsigned) << ',' << count_field(t.cl_disagree_signed) << ','
        << count_field(t.cl_disagree_unsigned) << ',' << format_g6(t.max_kkt) << ','
        << format_g6(t.max_dual_inf) << ',' << format_g6(t.wall_ms) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& summary) {
  out << kSummaryHeader << '\n';
  for (const auto& c : summary) {
    out << c.p << ',' << c.d << ',' << format_g6(c.beta) << ',' << c.n << ',' << c.trials << ','
        << format_g6(c.success_rate) << ',' << format_g6(c.l1_disagree_signed) << ','
        << format_g6(c.l1_disagree_unsigned) << ',' << format_g6(c.cl_disagree_signed) << ','
        << format_g6(c.cl_disagree_unsigned) << ',' << format_g6(c.mean_max_kkt) << ','
        << format_g6(c.mean_max_dual_inf) << ',' << c.nonconverged << ',' << c.failures << ','
        << (c.strict_dual_fraction ? format_g6(*c.strict_dual_fraction) : std::string()) << '\n';
  }
}

void write_sweep(const std::filesystem::path& dir, const SweepResult& sweep) {
  std::filesystem::create_directories(dir);
  std::ofstream trials(dir / "results.csv");
  std::ofstream summary(dir / "aggregated.csv");
  if (!trials || !summary) throw std::runtime_error("cannot write results under " + dir.string());
  write_trials_csv(trials, sweep.trials);
  write_summary_csv(summary, sweep.summary);
}

}  // namespace isingsel
