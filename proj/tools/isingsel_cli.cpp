// Command-line driver: experiment sweeps, single-cell debugging, condition
// checks on a stored model, and sampling / estimation on text-format data.

#include "isingsel/fisher.hpp"
#include "isingsel/graphs.hpp"
#include "isingsel/harness.hpp"
#include "isingsel/sampling.hpp"
#include "isingsel/selection.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace isingsel;

IsingModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file " + path);
  return read_model(in);
}

void print_trial(std::ostream& out, const TrialResult& t) {
  out << "p = " << t.p << '\n'
      << "d = " << t.d << '\n'
      << "beta = " << format_g6(t.beta) << '\n'
      << "n = " << t.n << '\n'
      << "trial = " << t.trial << '\n'
      << "seed = " << t.seed << '\n'
      << "lambda = " << format_g6(t.lambda) << '\n'
      << "success = " << (t.success ? 1 : 0) << '\n'
      << "l1_disagree_signed = " << t.l1_disagree_signed << '\n'
      << "l1_disagree_unsigned = " << t.l1_disagree_unsigned << '\n'
      << "cl_disagree_signed = " << t.cl_disagree_signed << '\n'
      << "cl_disagree_unsigned = " << t.cl_disagree_unsigned << '\n'
      << "max_kkt = " << format_g6(t.max_kkt) << '\n'
      << "nonconverged = " << t.nonconverged << '\n'
      << "max_dual_inf = " << format_g6(t.max_dual_inf) << '\n'
      << "wall_ms = " << format_g6(t.wall_ms) << '\n';
  if (t.failed()) out << "error = " << t.error << '\n';
}

int check_conditions(const std::string& model_path, std::optional<double> alpha_required, double n,
                     Index gibbs_rows, std::uint64_t seed) {
  const IsingModel model = load_model(model_path);
  const int p = model.p();
  std::optional<DistributionTable> table;
  std::optional<SampleMatrix> data;
  Matrix<double> moments;
  if (p <= kEnumerationCap) {
    table = enumerate_distribution(model);
    moments = table->second_moments();
    std::cout << "# fisher = population (exact enumeration)\n";
  } else {
    Rng rng(seed);
    data = gibbs_sample(model, gibbs_rows, GibbsOptions{}, rng);
    moments = empirical_second_moments(*data);
    std::cout << "# fisher = sample at theta* (" << gibbs_rows << " Gibbs rows)\n";
  }

  double worst_c_min = std::numeric_limits<double>::infinity();
  double worst_alpha = 1.0;
  bool all_defined = true;
  for (int r = 0; r < p; ++r) {
    const Matrix<double> q = table ? population_fisher(model, *table, r).Q
                                   : sample_fisher(*data, model.node_parameters(r), r).Q;
    const std::vector<Index> others = complement({r}, p);
    const auto support = support_of(model, r);
    const auto report =
        check_assumptions<double>(q, submatrix(moments, others, others), support, alpha_required.value_or(1e-12));
    std::cout << "\n[node " << r + 1 << "]\n";
    write_record(std::cout, report);
    if (support.empty()) continue;
    if (report.c_min_hat) worst_c_min = std::min(worst_c_min, *report.c_min_hat);
    if (report.alpha_hat) worst_alpha = std::min(worst_alpha, *report.alpha_hat);
    else all_defined = false;
  }

  std::cout << "\n[thresholds]\n";
  const double alpha = alpha_required.value_or(worst_alpha);
  std::cout << "alpha_used = " << format_g6(alpha) << '\n' << "c_min_used = " << format_g6(worst_c_min) << '\n';
  if (!all_defined || !(alpha > 0.0 && alpha <= 1.0) || !(worst_c_min > 0.0) || !std::isfinite(worst_c_min)) {
    std::cout << "thresholds = undefined (incoherence condition fails or Q_SS singular)\n";
    return 0;
  }
  std::cout << "n = " << format_g6(n) << '\n';
  write_record(std::cout, theorem_thresholds(worst_c_min, alpha, model.topology().max_degree(), p, n));
  std::cout << "theta_min = " << format_g6(model.min_abs_weight()) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signed edge recovery for binary Ising models via l1-regularized logistic regression"};
  app.require_subcommand(1);

  std::string config_path, out_dir, model_path, data_path;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;

  auto* sweep = app.add_subcommand("sweep", "Run every (p, beta, trial) cell of a config");
  sweep->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "Override base_seed");

  int trial_p = 0, trial_index = 0;
  double trial_beta = 0.0;
  auto* trial = app.add_subcommand("trial", "Run a single cell and print its result");
  trial->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  trial->add_option("--p", trial_p, "Vertex count")->required();
  trial->add_option("--beta", trial_beta, "Control parameter")->required();
  trial->add_option("--trial", trial_index, "Trial index")->required();
  trial->add_option("--seed", seed, "Override base_seed");

  std::optional<double> alpha_required;
  double threshold_n = 1000;
  Index gibbs_rows = 20000;
  auto* check = app.add_subcommand("check-conditions", "Print dependency/incoherence reports and thresholds");
  check->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  check->add_option("--alpha", alpha_required, "Required incoherence margin in (0, 1]");
  check->add_option("--n", threshold_n, "Sample size for threshold evaluation");
  check->add_option("--gibbs-rows", gibbs_rows, "Rows used when the model is too large to enumerate");
  check->add_option("--seed", seed, "Seed for the Gibbs fallback");

  std::string sampler_name = "auto";
  Index sample_rows = 1000;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Draw samples from a model file");
  sample->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  sample->add_option("--n", sample_rows, "Rows")->required();
  sample->add_option("--sampler", sampler_name, "auto, exact, star or gibbs")
      ->check(CLI::IsMember({"auto", "exact", "star", "gibbs"}));
  sample->add_option("--seed", seed, "Random seed");
  sample->add_option("--out", sample_out, "Output file (default stdout)");

  double lambda = 0.0;
  std::optional<double> lambda_scale;
  std::string combine_name = "and";
  auto* estimate = app.add_subcommand("estimate", "Estimate the signed graph of a sample file");
  estimate->add_option("--data", data_path, "Sample file")->required()->check(CLI::ExistingFile);
  auto* lambda_opt = estimate->add_option("--lambda", lambda, "Regularization weight");
  estimate->add_option("--lambda-scale", lambda_scale, "Use lambda = c sqrt(ln p / n)")->excludes(lambda_opt);
  estimate->add_option("--combine", combine_name, "and, or or nodewise")
      ->check(CLI::IsMember({"and", "or", "nodewise"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      ExperimentConfig config = load_config(config_path);
      if (seed) config.base_seed = *seed;
      const SweepResult result = run_sweep(config, jobs);
      write_sweep(out_dir, result);
      int failures = 0;
      for (const auto& cell : result.summary) {
        std::cout << "p=" << cell.p << " beta=" << format_g6(cell.beta) << " n=" << cell.n
                  << " success=" << format_g6(cell.success_rate) << '\n';
        failures += cell.failures;
      }
      if (failures > 0) std::cerr << failures << " trial(s) failed; see results.csv\n";
      return 0;
    }
    if (*trial) {
      ExperimentConfig config = load_config(config_path);
      if (seed) config.base_seed = *seed;
      const TrialResult result = run_trial(config, trial_p, trial_beta, trial_index);
      print_trial(std::cout, result);
      return result.failed() ? 1 : 0;
    }
    if (*check) return check_conditions(model_path, alpha_required, threshold_n, gibbs_rows, seed.value_or(1));
    if (*sample) {
      const IsingModel model = load_model(model_path);
      Rng rng(seed.value_or(1));
      SampleMatrix data;
      if (sampler_name == "gibbs" || (sampler_name == "auto" && !is_star(model.topology()) &&
                                      model.p() > kEnumerationCap))
        data = gibbs_sample(model, sample_rows, GibbsOptions{}, rng);
      else if (sampler_name == "star" || (sampler_name == "auto" && is_star(model.topology())))
        data = sample_exact_star(model, sample_rows, rng);
      else
        data = sample_exact_enum(model, sample_rows, rng);
      if (sample_out.empty()) {
        write_samples(std::cout, data);
      } else {
        std::ofstream out(sample_out);
        write_samples(out, data);
      }
      return 0;
    }
    if (*estimate) {
      std::ifstream in(data_path);
      const SampleMatrix data = read_samples(in);
      if (lambda_scale)
        lambda = *lambda_scale * std::sqrt(std::log(static_cast<double>(data.p())) / static_cast<double>(data.n()));
      const CombineRule rule = combine_name == "or"         ? CombineRule::Or
                               : combine_name == "nodewise" ? CombineRule::Nodewise
                                                            : CombineRule::And;
      const GraphEstimate result = estimate_graph(data, lambda, rule);
      write_estimate(std::cout, result);
      if (!result.reliable()) std::cerr << result.nonconverged << " node regression(s) did not converge\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
