#pragma once

#include "isingsel/graphs.hpp"
#include "isingsel/logreg.hpp"
#include "isingsel/sampling.hpp"
#include "isingsel/selection.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace isingsel {

enum class GraphClass { Grid4, Grid8, StarLinear, StarLog };
enum class SamplerKind { Exact, Gibbs };

struct ExperimentConfig {
  GraphClass graph_class = GraphClass::Grid4;
  std::vector<int> p_list{36, 64, 100};
  CouplingMode coupling = CouplingMode::Mixed;
  double omega = 0.5;
  std::vector<double> beta_grid{0.2, 0.6, 1.0, 1.4, 1.8, 2.2};
  int trials = 50;
  double lambda_scale = 1.0;  ///< c in lambda = c sqrt(ln p / n)
  SamplerKind sampler = SamplerKind::Gibbs;
  GibbsOptions gibbs;
  std::uint64_t base_seed = 20090101;
  bool run_l1 = true;
  bool run_chow_liu = true;
  CombineRule combine = CombineRule::And;
  SolverOptions solver;
  double star_log_base = std::numbers::e;

  /// Throws std::invalid_argument on any broken invariant.
  void validate() const;
};

/// Defaults per graph class: Gibbs for lattices, exact
/// sampling for stars, coupling strength and beta grid per class.
ExperimentConfig default_config(GraphClass graph_class);

/// Parses `key = value` lines with optional [experiment], [sampler] and
/// [solver] sections; `#` starts a comment. Unknown keys are an error.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const ExperimentConfig& config);

Topology make_topology(GraphClass graph_class, int p, double star_log_base = std::numbers::e);

/// ceil(10 beta d ln p), at least 1.
Index sample_size(double beta, int d, int p);

/// Stable 64-bit cell seed from (base_seed, p, beta, trial). Uses the bit
/// pattern of beta so inserting grid points leaves other cells unchanged.
std::uint64_t cell_seed(std::uint64_t base_seed, int p, double beta, int trial);

struct TrialResult {
  int p = 0;
  int d = 0;
  double beta = 0.0;
  Index n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  bool success = false;
  int l1_disagree_signed = -1;  ///< -1 when the method did not run
  int l1_disagree_unsigned = -1;
  int cl_disagree_signed = -1;
  int cl_disagree_unsigned = -1;
  double max_kkt = 0.0;
  int nonconverged = 0;
  double max_dual_inf = 0.0;      ///< max over nodes of ||zhat_{S^c}||_inf
  bool strict_dual_feasible = false;
  double max_abs_zhat = 0.0;      ///< over converged solves
  double max_support_sign_gap = 0.0;  ///< max |zhat_j - sign(theta_j)| on supports
  double wall_ms = 0.0;
  std::string error;              ///< nonempty when the trial failed

  [[nodiscard]] bool failed() const noexcept { return !error.empty(); }
};

TrialResult run_trial(const ExperimentConfig& config, int p, double beta, int trial);

struct CellSummary {
  int p = 0;
  int d = 0;
  double beta = 0.0;
  Index n = 0;
  int trials = 0;
  double success_rate = 0.0;
  double l1_disagree_signed = 0.0;
  double l1_disagree_unsigned = 0.0;
  double cl_disagree_signed = 0.0;
  double cl_disagree_unsigned = 0.0;
  double mean_max_kkt = 0.0;
  double mean_max_dual_inf = 0.0;
  int nonconverged = 0;
  int failures = 0;
  /// Among successful trials, fraction with ||zhat_{S^c}||_inf < 1 at every node.
  std::optional<double> strict_dual_fraction;
};

struct SweepResult {
  std::vector<TrialResult> trials;   ///< sorted by (p, beta, trial)
  std::vector<CellSummary> summary;  ///< sorted by (p, beta)

  [[nodiscard]] const CellSummary& cell(int p, double beta) const;
};

SweepResult run_sweep(const ExperimentConfig& config, unsigned jobs = 1);

/// Aggregates trials (already sorted by (p, beta, trial)) per (p, beta).
std::vector<CellSummary> aggregate(const std::vector<TrialResult>& trials);

inline constexpr const char* kTrialHeader =
    "p,d,beta,n,trial,seed,success,l1_disagree_signed,l1_disagree_unsigned,"
    "cl_disagree_signed,cl_disagree_unsigned,max_kkt,max_dual_inf,wall_ms";
inline constexpr const char* kSummaryHeader =
    "p,d,beta,n,trials,success_rate,l1_disagree_signed,l1_disagree_unsigned,"
    "cl_disagree_signed,cl_disagree_unsigned,max_kkt,max_dual_inf,nonconverged,failures,"
    "strict_dual_fraction";

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials);
void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& summary);

/// Writes results.csv and aggregated.csv under `dir` (created if missing).
void write_sweep(const std::filesystem::path& dir, const SweepResult& sweep);

/// Printf-style %.6g.
std::string format_g6(double value);

std::string to_string(GraphClass graph_class);
std::string to_string(SamplerKind sampler);
std::string to_string(CouplingMode coupling);
std::string to_string(CombineRule rule);

}  // namespace isingsel
