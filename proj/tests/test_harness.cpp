#include "isingsel/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace isingsel;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c = default_config(GraphClass::Grid4);
  c.p_list = {16, 36};
  c.beta_grid = {0.5, 1.5};
  c.trials = 3;
  c.gibbs.burn_in_sweeps = 50;
  return c;
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return {};
}

bool same_except_time(const TrialResult& a, const TrialResult& b) {
  return a.p == b.p && a.d == b.d && a.beta == b.beta && a.n == b.n && a.trial == b.trial && a.seed == b.seed &&
         a.lambda == b.lambda && a.success == b.success && a.l1_disagree_signed == b.l1_disagree_signed &&
         a.l1_disagree_unsigned == b.l1_disagree_unsigned && a.cl_disagree_signed == b.cl_disagree_signed &&
         a.cl_disagree_unsigned == b.cl_disagree_unsigned && a.max_kkt == b.max_kkt &&
         a.nonconverged == b.nonconverged && a.max_dual_inf == b.max_dual_inf && a.error == b.error;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string field; std::getline(ss, field, ',');) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("sample size formula") {
  CHECK(sample_size(2.0, 4, 64) == 333);
  CHECK(sample_size(1e-9, 4, 64) == 1);
  for (double beta : {0.2, 0.6, 1.4, 2.2})
    for (int p : {36, 64, 100})
      CHECK(sample_size(beta, 4, p) == static_cast<Index>(std::ceil(10.0 * beta * 4.0 * std::log(p))));
}

TEST_CASE("cell seeds") {
  CHECK(cell_seed(1, 64, 0.6, 3) == cell_seed(1, 64, 0.6, 3));
  CHECK(cell_seed(1, 64, 0.6, 3) != cell_seed(1, 64, 0.6, 4));
  CHECK(cell_seed(1, 64, 0.6, 3) != cell_seed(1, 100, 0.6, 3));
  CHECK(cell_seed(1, 64, 0.6, 3) != cell_seed(1, 64, 1.0, 3));
  CHECK(cell_seed(1, 64, 0.6, 3) != cell_seed(2, 64, 0.6, 3));
}

TEST_CASE("default configs") {
  const ExperimentConfig g4 = default_config(GraphClass::Grid4);
  CHECK(g4.p_list == std::vector<int>{36, 64, 100});
  CHECK(g4.trials == 50);
  CHECK(g4.omega == 0.5);
  CHECK(g4.sampler == SamplerKind::Gibbs);
  CHECK(g4.gibbs.burn_in_sweeps == 200);
  CHECK(g4.gibbs.spacing_sweeps == 5);
  CHECK(g4.combine == CombineRule::And);
  CHECK(default_config(GraphClass::Grid8).omega == 0.25);
  CHECK(default_config(GraphClass::StarLog).sampler == SamplerKind::Exact);
  CHECK(default_config(GraphClass::StarLinear).coupling == CouplingMode::Positive);
  CHECK(ExperimentConfig{}.lambda_scale == 1.0);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse(
      "# comment\n"
      "[experiment]\n"
      "graph_class = star_log\n"
      "p_list = 64, 100\n"
      "beta_grid = 0.5, 1.0\n"
      "trials = 7  # trailing comment\n"
      "lambda_scale = 2.5\n"
      "methods = CL\n"
      "star_log_base = 2\n"
      "[sampler]\n"
      "sampler = gibbs\n"
      "spacing_sweeps = 3\n"
      "[solver]\n"
      "max_iters = 100\n");
  CHECK(c.graph_class == GraphClass::StarLog);
  CHECK(c.p_list == std::vector<int>{64, 100});
  CHECK(c.beta_grid == std::vector<double>{0.5, 1.0});
  CHECK(c.trials == 7);
  CHECK(c.lambda_scale == 2.5);
  CHECK_FALSE(c.run_l1);
  CHECK(c.run_chow_liu);
  CHECK(c.star_log_base == 2.0);
  CHECK(c.sampler == SamplerKind::Gibbs);
  CHECK(c.gibbs.spacing_sweeps == 3);
  CHECK(c.solver.max_iters == 100);
  CHECK(c.omega == 0.25);  // class default retained
}

TEST_CASE("config errors") {
  CHECK(error_of("colour = red\n").find("line 1") != std::string::npos);
  CHECK(error_of("trials = 3\ntrials = 4\n").find("duplicate") != std::string::npos);
  CHECK(error_of("[plots]\n").find("unknown section") != std::string::npos);
  CHECK(error_of("trials\n").find("key = value") != std::string::npos);
  CHECK(error_of("\n\ntrials = many\n").find("line 3") != std::string::npos);
  CHECK(error_of("beta_grid = 1.0, 0.5\n").find("increasing") != std::string::npos);
  CHECK(error_of("trials = 0\n").find("trials") != std::string::npos);
  CHECK(error_of("lambda_scale = -1\n").find("lambda_scale") != std::string::npos);
  CHECK(error_of("methods = PC\n").find("methods") != std::string::npos);
  CHECK(error_of("[sampler]\nkkt_tol = 1e-6\n").find("unknown key") != std::string::npos);
  CHECK(error_of("graph_class = torus\n").find("graph_class") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.conf"), std::invalid_argument);
}

TEST_CASE("config text round trip") {
  ExperimentConfig c = default_config(GraphClass::Grid8);
  c.beta_grid = {0.1, 0.7, 1.3};
  c.base_seed = 123456789;
  c.run_chow_liu = false;
  c.gibbs.random_scan = true;
  std::stringstream buf;
  write_config(buf, c);
  const ExperimentConfig back = parse_config(buf);
  CHECK(back.graph_class == c.graph_class);
  CHECK(back.beta_grid == c.beta_grid);
  CHECK(back.base_seed == c.base_seed);
  CHECK(back.run_chow_liu == c.run_chow_liu);
  CHECK(back.gibbs.random_scan);
  CHECK(back.lambda_scale == c.lambda_scale);
}

TEST_CASE("topology per class") {
  CHECK(make_topology(GraphClass::Grid4, 64).max_degree() == 4);
  CHECK(make_topology(GraphClass::Grid8, 36).max_degree() == 8);
  CHECK(make_topology(GraphClass::StarLinear, 100).max_degree() == 10);
  CHECK(make_topology(GraphClass::StarLog, 100).max_degree() == 5);
  CHECK_THROWS_AS(make_topology(GraphClass::Grid4, 50), std::invalid_argument);
}

TEST_CASE("single trial") {
  const ExperimentConfig c = small_config();
  const TrialResult t = run_trial(c, 36, 1.5, 2);
  CHECK_FALSE(t.failed());
  CHECK(t.p == 36);
  CHECK(t.d == 4);
  CHECK(t.n == sample_size(1.5, 4, 36));
  CHECK(t.seed == cell_seed(c.base_seed, 36, 1.5, 2));
  CHECK(t.lambda == doctest::Approx(c.lambda_scale * std::sqrt(std::log(36.0) / static_cast<double>(t.n))));
  CHECK(t.l1_disagree_signed >= 0);
  CHECK(t.cl_disagree_unsigned >= 0);
  CHECK(t.l1_disagree_unsigned <= t.l1_disagree_signed);
  CHECK(t.max_abs_zhat <= 1.0 + 1e-6);
  CHECK(same_except_time(t, run_trial(c, 36, 1.5, 2)));
}

TEST_CASE("failures are recorded, not thrown") {
  ExperimentConfig c = small_config();
  c.p_list = {20};  // not a perfect square
  const TrialResult t = run_trial(c, 20, 0.5, 0);
  CHECK(t.failed());
  CHECK_FALSE(t.success);
  const SweepResult s = run_sweep(c);
  REQUIRE(s.summary.size() == 2);
  for (const auto& cell : s.summary) CHECK(cell.failures == c.trials);
}

TEST_CASE("methods can be disabled") {
  ExperimentConfig c = small_config();
  c.run_chow_liu = false;
  const TrialResult t = run_trial(c, 16, 0.5, 0);
  CHECK(t.cl_disagree_signed == -1);
  std::ostringstream out;
  write_trials_csv(out, {t});
  CHECK(out.str().find(",,,") != std::string::npos);
}

TEST_CASE("sweep is deterministic and order independent") {
  const ExperimentConfig c = small_config();
  const SweepResult serial = run_sweep(c, 1);
  const SweepResult parallel = run_sweep(c, 3);
  REQUIRE(serial.trials.size() == 12);
  REQUIRE(parallel.trials.size() == 12);
  for (std::size_t k = 0; k < serial.trials.size(); ++k) {
    CHECK(same_except_time(serial.trials[k], parallel.trials[k]));
    if (k > 0) {
      const auto& a = serial.trials[k - 1];
      const auto& b = serial.trials[k];
      CHECK(std::tie(a.p, a.beta, a.trial) < std::tie(b.p, b.beta, b.trial));
    }
    const auto& t = serial.trials[k];
    CHECK(t.n == sample_size(t.beta, t.d, t.p));
  }
  // A cell's result does not depend on which other cells exist.
  ExperimentConfig wider = c;
  wider.beta_grid = {0.5, 1.0, 1.5};
  const SweepResult more = run_sweep(wider, 2);
  for (const auto& t : serial.trials) {
    bool found = false;
    for (const auto& u : more.trials)
      if (u.p == t.p && u.beta == t.beta && u.trial == t.trial) found = same_except_time(t, u);
    CHECK(found);
  }
}

TEST_CASE("aggregation") {
  std::vector<TrialResult> trials(4);
  for (int k = 0; k < 4; ++k) {
    trials[k].p = 16;
    trials[k].d = 4;
    trials[k].beta = 1.0;
    trials[k].trial = k;
    trials[k].success = k < 3;
    trials[k].l1_disagree_signed = k;
    trials[k].cl_disagree_signed = -1;
  }
  trials[3].error = "boom";
  const auto summary = aggregate(trials);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].trials == 4);
  CHECK(summary[0].success_rate == 0.75);
  CHECK(summary[0].l1_disagree_signed == 1.5);
  CHECK(std::isnan(summary[0].cl_disagree_signed));
  CHECK(summary[0].failures == 1);
}

TEST_CASE("result files follow the documented schema") {
  const ExperimentConfig c = small_config();
  const SweepResult sweep = run_sweep(c, 2);
  const auto dir = std::filesystem::temp_directory_path() / "isingsel_schema_test";
  std::filesystem::remove_all(dir);
  write_sweep(dir, sweep);

  std::ifstream results(dir / "results.csv");
  std::string line;
  REQUIRE(std::getline(results, line));
  CHECK(line ==
        "p,d,beta,n,trial,seed,success,l1_disagree_signed,l1_disagree_unsigned,cl_disagree_signed,"
        "cl_disagree_unsigned,max_kkt,max_dual_inf,wall_ms");
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> tally;
  int rows = 0;
  while (std::getline(results, line)) {
    const auto f = split(line);
    REQUIRE(f.size() == 14);
    CHECK((f[6] == "0" || f[6] == "1"));
    const int p = std::stoi(f[0]), d = std::stoi(f[1]);
    CHECK(std::stoll(f[3]) == sample_size(std::stod(f[2]), d, p));
    for (std::size_t k : {2u, 11u, 12u, 13u}) CHECK(f[k] == format_g6(std::stod(f[k])));
    auto& cell = tally[{f[0], f[2]}];
    cell.first += f[6] == "1";
    cell.second += 1;
    ++rows;
  }
  CHECK(rows == 12);

  std::ifstream aggregated(dir / "aggregated.csv");
  REQUIRE(std::getline(aggregated, line));
  CHECK(line == kSummaryHeader);
  int cells = 0;
  while (std::getline(aggregated, line)) {
    const auto f = split(line);
    REQUIRE(f.size() == split(kSummaryHeader).size());
    const auto& [wins, total] = tally.at({f[0], f[2]});
    CHECK(std::stoi(f[4]) == total);
    CHECK(f[5] == format_g6(static_cast<double>(wins) / total));
    ++cells;
  }
  CHECK(cells == 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting") {
  CHECK(format_g6(0.5) == "0.5");
  CHECK(format_g6(1.0 / 3.0) == "0.333333");
  CHECK(format_g6(1234567.0) == "1.23457e+06");
  CHECK(format_g6(std::nan("")).empty());
}

TEST_CASE("sweep lookup") {
  const SweepResult s = run_sweep(small_config());
  CHECK(s.cell(16, 1.5).trials == 3);
  CHECK_THROWS_AS(s.cell(17, 1.5), std::out_of_range);
}

}  // TEST_SUITE
