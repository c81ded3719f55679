// Batch pipeline: gen -> train -> curves -> eval -> allocate.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "mmce/io.hpp"

namespace {

using namespace mmce;

// One curve per distinct rider id, features from its first dataset row.
std::vector<ResponseCurve> curves_for_dataset(const MmceModel& model, const Dataset& data) {
  std::vector<ResponseCurve> curves;
  std::set<std::int64_t> seen;
  for (const Example& e : data.examples) {
    if (!seen.insert(e.id).second) continue;
    curves.push_back(model.predict_curve(e.id, e.x));
  }
  return curves;
}

std::map<std::int64_t, std::map<double, GroundTruthRow>> truth_by_rider(
    const std::vector<GroundTruthRow>& rows) {
  std::map<std::int64_t, std::map<double, GroundTruthRow>> out;
  for (const GroundTruthRow& r : rows) out[r.id][r.t] = r;
  return out;
}

double observational_slope(const Dataset& data) {
  double st = 0, so = 0, stt = 0, sto = 0;
  const double n = static_cast<double>(data.examples.size());
  for (const Example& e : data.examples) {
    st += e.t;
    so += e.orders;
    stt += e.t * e.t;
    sto += e.t * e.orders;
  }
  const double denom = n * stt - st * st;
  return denom == 0.0 ? 0.0 : (n * sto - st * so) / denom;
}

int cmd_gen(const std::string& config_path, const std::string& out_path,
            std::string truth_path) {
  const io::RunConfig cfg = io::RunConfig::parse_file(config_path);
  if (truth_path.empty()) truth_path = out_path + ".truth.csv";
  const Generated gen = build_dataset(cfg.gen);
  io::write_dataset_csv(gen.dataset, out_path);
  io::write_truth_csv(gen.truth, truth_path);
  std::size_t blank = 0;
  for (const Example& e : gen.dataset.examples) blank += e.treated ? 0 : 1;
  const double slope = observational_slope(gen.dataset);
  std::cout << "rows=" << gen.dataset.examples.size() << " blank=" << blank
            << " observational_slope=" << io::format_double(slope)
            << (slope < 0 ? " (decreasing)" : " (increasing)") << '\n';
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_path) {
  io::RunConfig cfg = io::RunConfig::parse_file(config_path);
  const Dataset data = io::read_dataset_csv(data_path);
  if (data.feature_width != cfg.model.feature_width) {
    throw ConfigError("dataset feature width does not match config");
  }
  if (cfg.model.head == HeadKind::SShaped && !cfg.ceiling_explicit) {
    // Default ceiling: 99th percentile of the orders label.
    std::vector<double> labels;
    for (const Example& e : data.examples) labels.push_back(e.orders);
    std::sort(labels.begin(), labels.end());
    const std::size_t idx = std::min(labels.size() - 1,
                                     static_cast<std::size_t>(0.99 * labels.size()));
    cfg.model.hyper.ceiling = std::max(labels[idx], 1e-6);
  }
  cfg.train.log = [](const TrainLogEntry& e) { std::cout << format_log_line(e) << '\n'; };
  const MmceModel model = fit(data, cfg.model, cfg.train);
  io::save_model(model, out_path);
  return 0;
}

int cmd_curves(const std::string& model_path, const std::string& data_path,
               const std::string& out_path) {
  const MmceModel model = io::load_model(model_path);
  const Dataset data = io::read_dataset_csv(data_path);
  io::write_curves_csv(curves_for_dataset(model, data), out_path);
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& model_path,
             const std::string& holdout_path, const std::string& truth_path,
             const std::string& out_path, bool force) {
  const io::RunConfig cfg = io::RunConfig::parse_file(config_path);
  const MmceModel model = io::load_model(model_path);
  const Dataset holdout = io::read_dataset_csv(holdout_path);

  EvalReport report;
  report.verdict = eligibility_check(holdout, cfg.eligibility);
  const PositivityReport positivity = positivity_check(holdout, cfg.eligibility.n_bins);
  for (const auto& bin : positivity.bins) report.flagged_bins += bin.flagged ? 1 : 0;
  if (!report.verdict.eligible && !force) {
    for (const auto& reason : report.verdict.reasons) {
      std::cerr << "ineligible: " << reason << '\n';
    }
    throw EligibilityError("holdout failed eligibility (use --force to override)");
  }

  const auto curves = curves_for_dataset(model, holdout);
  report.monotonicity = monotonicity_score(curves);

  // Stratify by the model's own natural prediction when no ground truth is
  // supplied, by true ability otherwise.
  std::vector<double> ability;
  std::map<std::int64_t, double> truth_ability;
  std::map<std::int64_t, std::map<double, GroundTruthRow>> truth;
  if (!truth_path.empty()) {
    truth = truth_by_rider(io::read_truth_csv(truth_path));
    for (const auto& [id, rows] : truth) truth_ability[id] = rows.begin()->second.ability;
  }
  for (const ResponseCurve& c : curves) {
    ability.push_back(truth_path.empty() ? c.natural : truth_ability.at(c.id));
  }
  const std::size_t k = std::min<std::size_t>(5, curves.size());
  const Stratification strat = stratify(curves, ability, k);
  report.stratification = stratification_score(strat);
  report.marginal_effect = marginal_effect_score(strat);
  report.gini = gini_score(model, holdout);

  if (!truth_path.empty()) {
    double mae = 0.0;
    std::size_t n = 0;
    for (const ResponseCurve& c : curves) {
      const auto& rows = truth.at(c.id);
      for (std::size_t g = 0; g < c.grid.size(); ++g) {
        mae += std::abs(c.orders[g] - rows.at(c.grid[g]).true_orders);
        ++n;
      }
    }
    report.curve_mae_vs_truth = mae / static_cast<double>(n);
  }

  io::write_eval_report(report, positivity, out_path);
  std::cout << "monotonicity=" << report.monotonicity
            << " stratification=" << report.stratification
            << " marginal_effect=" << report.marginal_effect << " gini=" << report.gini
            << " eligible=" << (report.verdict.eligible ? "true" : "false") << '\n';
  return 0;
}

int cmd_allocate(const std::string& model_path, const std::string& data_path, double budget,
                 const std::string& truth_path, const std::string& out_path, bool exact) {
  if (budget < 0.0) throw ConfigError("budget must be >= 0");
  const MmceModel model = io::load_model(model_path);
  const Dataset data = io::read_dataset_csv(data_path);

  AllocationProblem problem;
  problem.budget = budget;
  problem.levels = model.config().grid.levels;
  problem.curves = curves_for_dataset(model, data);
  const Assignment a = exact ? allocate_bruteforce(problem) : allocate_greedy(problem);
  io::write_assignment_csv(a, out_path);

  std::cout << "cost=" << io::format_double(a.total_cost)
            << " predicted_incremental=" << io::format_double(a.total_incremental);
  if (!truth_path.empty()) {
    const auto truth = truth_by_rider(io::read_truth_csv(truth_path));
    double realized = 0.0;
    for (const auto& c : a.choices) {
      const auto& rows = truth.at(c.id);
      realized += rows.at(c.t).true_orders - rows.at(0.0).true_orders;
    }
    std::cout << " realized_incremental=" << io::format_double(realized);
  }
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MMCE batch pipeline"};
  app.require_subcommand(1);

  std::string config_path, data_path, model_path, out_path, truth_path;
  double budget = 0.0;
  bool force = false, exact = false;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset + ground truth");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--out", out_path)->required();
  gen->add_option("--truth", truth_path);

  auto* train = app.add_subcommand("train", "train a model on a dataset");
  train->add_option("--config", config_path)->required();
  train->add_option("--data", data_path)->required();
  train->add_option("--out", out_path)->required();

  auto* curves = app.add_subcommand("curves", "emit per-rider response curves");
  curves->add_option("--model", model_path)->required();
  curves->add_option("--data", data_path)->required();
  curves->add_option("--out", out_path)->required();

  auto* eval = app.add_subcommand("eval", "evaluate a model on a holdout");
  eval->add_option("--config", config_path)->required();
  eval->add_option("--model", model_path)->required();
  eval->add_option("--data", data_path)->required();
  eval->add_option("--truth", truth_path);
  eval->add_option("--out", out_path)->required();
  eval->add_flag("--force", force, "evaluate even if the holdout is ineligible");

  auto* allocate = app.add_subcommand("allocate", "budget-constrained assignment");
  allocate->add_option("--model", model_path)->required();
  allocate->add_option("--data", data_path)->required();
  allocate->add_option("--budget", budget)->required();
  allocate->add_option("--truth", truth_path);
  allocate->add_option("--out", out_path)->required();
  allocate->add_flag("--exact", exact, "brute-force optimum (small instances only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors share the config exit code
  }

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_path, truth_path);
    if (train->parsed()) return cmd_train(config_path, data_path, out_path);
    if (curves->parsed()) return cmd_curves(model_path, data_path, out_path);
    if (eval->parsed()) {
      return cmd_eval(config_path, model_path, data_path, truth_path, out_path, force);
    }
    if (allocate->parsed()) {
      return cmd_allocate(model_path, data_path, budget, truth_path, out_path, exact);
    }
  } catch (const mmce::EligibilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const mmce::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const mmce::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {  // config/validation/usage
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
