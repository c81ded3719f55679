#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mmce/datagen.hpp"
#include "mmce/io.hpp"

using namespace mmce;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mmce_io_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("format_double round-trips arbitrary doubles bit-exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(std::strtod(io::format_double(0.1).c_str(), nullptr) == 0.1);
  CHECK(io::format_double(1.0) == "1");
}

TEST_CASE("dataset csv round-trips every field bit-exactly") {
  GenConfig cfg;
  cfg.n_riders = 50;
  cfg.feature_width = 3;
  cfg.seed = 5;
  const Generated gen = build_dataset(cfg);
  const std::string path = tmp_path("dataset.csv");
  io::write_dataset_csv(gen.dataset, path);
  const Dataset back = io::read_dataset_csv(path);
  REQUIRE(back.examples.size() == gen.dataset.examples.size());
  CHECK(back.feature_width == gen.dataset.feature_width);
  for (std::size_t i = 0; i < back.examples.size(); ++i) {
    const Example& a = gen.dataset.examples[i];
    const Example& b = back.examples[i];
    CHECK(a.id == b.id);
    CHECK(a.x == b.x);
    CHECK(a.t == b.t);
    CHECK(a.attendance == b.attendance);
    CHECK(a.orders == b.orders);
    CHECK(a.treated == b.treated);
  }
  std::filesystem::remove(path);
}

TEST_CASE("dataset csv rejects malformed input") {
  const std::string path = tmp_path("bad.csv");
  CHECK_THROWS_AS(io::read_dataset_csv(tmp_path("does_not_exist.csv")), IoError);

  std::ofstream(path) << "id,x_0,t,attendance,orders,group\n1,0.5,1.0,1,2.0,banana\n";
  CHECK_THROWS_AS(io::read_dataset_csv(path), IoError);

  std::ofstream(path) << "not,a,real,header\n";
  CHECK_THROWS_AS(io::read_dataset_csv(path), IoError);

  std::ofstream(path) << "id,x_0,t,attendance,orders,group\n1,oops,1.0,1,2.0,treated\n";
  CHECK_THROWS_AS(io::read_dataset_csv(path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("truth csv round-trips") {
  GenConfig cfg;
  cfg.n_riders = 5;
  cfg.feature_width = 2;
  cfg.t_max = 1.0;
  const Generated gen = build_dataset(cfg);
  const std::string path = tmp_path("truth.csv");
  io::write_truth_csv(gen.truth, path);
  const auto back = io::read_truth_csv(path);
  REQUIRE(back.size() == gen.truth.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == gen.truth[i].id);
    CHECK(back[i].ability == gen.truth[i].ability);
    CHECK(back[i].t == gen.truth[i].t);
    CHECK(back[i].true_attendance == gen.truth[i].true_attendance);
    CHECK(back[i].true_orders_pa == gen.truth[i].true_orders_pa);
    CHECK(back[i].true_orders == gen.truth[i].true_orders);
  }
  std::filesystem::remove(path);
}

TEST_CASE("model file round-trips to bit-identical predictions") {
  ModelConfig cfg;
  cfg.scheme = SchemeKind::Mmce2;
  cfg.head = HeadKind::SShaped;
  cfg.feature_width = 3;
  cfg.hidden = {5, 4};
  cfg.grid = TreatmentGrid::uniform(2.0, 0.5);
  const auto model = MmceModel::init(cfg, 11);
  const std::string path = tmp_path("model.txt");
  io::save_model(model, path);
  const MmceModel back = io::load_model(path);

  CHECK(back.config().scheme == cfg.scheme);
  CHECK(back.config().head == cfg.head);
  CHECK(back.config().hidden == cfg.hidden);
  CHECK(back.config().grid.levels == cfg.grid.levels);
  CHECK(back.config().hyper.ceiling == cfg.hyper.ceiling);

  REQUIRE(back.store().groups().size() == model.store().groups().size());
  for (std::size_t g = 0; g < model.store().groups().size(); ++g) {
    CHECK(back.store().groups()[g].name == model.store().groups()[g].name);
    CHECK(back.store().groups()[g].values == model.store().groups()[g].values);
  }

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x = {dist(rng), dist(rng), dist(rng)};
    for (double t : {0.0, 0.5, 2.0}) {
      CHECK(back.predict_orders(x, t) == model.predict_orders(x, t));
      CHECK(back.predict_attendance(x, t) == model.predict_attendance(x, t));
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("model file parsing errors") {
  const std::string path = tmp_path("badmodel.txt");
  std::ofstream(path) << "SOMETHING ELSE v9\n";
  CHECK_THROWS_AS(io::load_model(path), ConfigError);

  std::ofstream(path) << "MMCE-MODEL v1\nmystery_key 3\n";
  CHECK_THROWS_AS(io::load_model(path), IoError);

  std::ofstream(path) << "MMCE-MODEL v1\ngroup trunk.W0 4\n1 2\n";
  CHECK_THROWS_AS(io::load_model(path), IoError);  // truncated values
  std::filesystem::remove(path);
}

TEST_CASE("curves and assignment writers emit one row per entry") {
  ResponseCurve c;
  c.id = 9;
  c.grid = {0.0, 1.0};
  c.attendance = {0.5, 0.6};
  c.orders_pa = {2.0, 2.5};
  c.orders = {1.0, 1.5};
  c.incremental = {0.0, 0.5};
  c.natural = 1.0;
  const std::string cpath = tmp_path("curves.csv");
  io::write_curves_csv({c}, cpath);
  const std::string curves = slurp(cpath);
  CHECK(curves ==
        "id,t,attendance,orders_pa,orders,natural,incremental\n"
        "9,0,0.5,2,1,1,0\n"
        "9,1,0.59999999999999998,2.5,1.5,1,0.5\n");

  Assignment a;
  a.choices.push_back({7, 1.5, 1.5, 0.25});
  a.total_cost = 1.5;
  a.total_incremental = 0.25;
  const std::string apath = tmp_path("assign.csv");
  io::write_assignment_csv(a, apath);
  CHECK(slurp(apath) == "id,t,cost,pred_incremental\n7,1.5,1.5,0.25\n");
  std::filesystem::remove(cpath);
  std::filesystem::remove(apath);
}

TEST_CASE("eval report writer") {
  EvalReport report;
  report.monotonicity = 1.0;
  report.stratification = 0.75;
  report.marginal_effect = 1.0;
  report.gini = 0.5;
  report.flagged_bins = 1;
  report.verdict.eligible = false;
  report.verdict.macro_monotonicity = 0.8;
  report.verdict.reasons = {"macro: observed orders-vs-treatment curve fails monotonicity"};
  PositivityReport positivity;
  positivity.bins.push_back({0, 3, 10, {1}, true});
  const std::string path = tmp_path("report.txt");
  io::write_eval_report(report, positivity, path);
  const std::string text = slurp(path);
  CHECK(text.find("monotonicity_score=1\n") != std::string::npos);
  CHECK(text.find("eligible=false\n") != std::string::npos);
  CHECK(text.find("reason=macro") != std::string::npos);
  CHECK(text.find("flagged_bin=feature:0,bin:3\n") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("run config parses known keys and propagates defaults") {
  const std::string path = tmp_path("run.cfg");
  std::ofstream(path) << "# comment line\n"
                         "n_riders=200\n"
                         "feature_width=4\n"
                         "bias_strength=0.5\n"
                         "t_max=2.0\n"
                         "seed=77\n"
                         "scheme=mmce1\n"
                         "head=log\n"
                         "hidden=16,8\n"
                         "epochs=3\n"
                         "budget=12.5\n"
                         "sutva=false\n"
                         "important_features=0,1\n";
  const io::RunConfig cfg = io::RunConfig::parse_file(path);
  CHECK(cfg.gen.n_riders == 200);
  CHECK(cfg.gen.bias_strength == 0.5);
  CHECK(cfg.gen.seed == 77);
  CHECK(cfg.train.seed == 77);  // one seed drives generation and training
  CHECK(cfg.model.scheme == SchemeKind::Mmce1);
  CHECK(cfg.model.head == HeadKind::Logarithmic);
  CHECK(cfg.model.hidden == std::vector<std::size_t>{16, 8});
  CHECK(cfg.model.feature_width == 4);              // mirrored from gen
  CHECK(cfg.model.grid.levels.back() == 2.0);       // grid derived from t_max
  CHECK(cfg.train.epochs == 3);
  CHECK(cfg.budget == 12.5);
  CHECK_FALSE(cfg.eligibility.sutva_affirmed);
  CHECK(cfg.eligibility.important_features == std::vector<std::size_t>{0, 1});
  CHECK_FALSE(cfg.ceiling_explicit);
  std::filesystem::remove(path);
}

TEST_CASE("run config: explicit ceiling is flagged, unknown keys are named") {
  CHECK(io::RunConfig::parse({{"ceiling", "4.5"}}).ceiling_explicit);
  CHECK(io::RunConfig::parse({{"ceiling", "4.5"}}).model.hyper.ceiling == 4.5);
  CHECK_THROWS_WITH_AS(io::RunConfig::parse({{"not_a_key", "1"}}),
                       doctest::Contains("not_a_key"), ConfigError);
  CHECK_THROWS_AS(io::RunConfig::parse({{"sutva", "maybe"}}), ConfigError);
  CHECK_THROWS_AS(io::RunConfig::parse({{"epochs", "zero"}}), IoError);
  CHECK_THROWS_AS(io::RunConfig::parse({{"bias_strength", "2.0"}}), ConfigError);
}

TEST_CASE("run config rejects malformed lines") {
  const std::string path = tmp_path("bad.cfg");
  std::ofstream(path) << "this line has no equals sign\n";
  CHECK_THROWS_AS(io::RunConfig::parse_file(path), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(io::RunConfig::parse_file(tmp_path("missing.cfg")), IoError);
}
