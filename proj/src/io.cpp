#include "mmce/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmce::io {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad numeric field '" + s + "' in " + what);
  }
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad integer field '" + s + "' in " + what);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Dataset CSV: id,x_0,...,x_{d-1},t,attendance,orders,group

void write_dataset_csv(const Dataset& data, const std::string& path) {
  auto out = open_out(path);
  out << "id";
  for (std::size_t d = 0; d < data.feature_width; ++d) out << ",x_" << d;
  out << ",t,attendance,orders,group\n";
  for (const Example& e : data.examples) {
    out << e.id;
    for (double v : e.x) out << ',' << format_double(v);
    out << ',' << format_double(e.t) << ',' << static_cast<int>(e.attendance) << ','
        << format_double(e.orders) << ',' << (e.treated ? "treated" : "blank") << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
  const auto header = split(line, ',');
  if (header.size() < 5 || header.front() != "id" || header.back() != "group") {
    throw IoError("bad dataset header in " + path);
  }
  Dataset data;
  data.feature_width = header.size() - 5;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw IoError("bad row width in " + path);
    Example e;
    e.id = parse_int(f[0], path);
    e.x.reserve(data.feature_width);
    for (std::size_t d = 0; d < data.feature_width; ++d) {
      e.x.push_back(parse_double(f[1 + d], path));
    }
    e.t = parse_double(f[1 + data.feature_width], path);
    e.attendance = parse_double(f[2 + data.feature_width], path);
    e.orders = parse_double(f[3 + data.feature_width], path);
    const std::string& group = f[4 + data.feature_width];
    if (group == "treated") {
      e.treated = true;
    } else if (group == "blank") {
      e.treated = false;
    } else {
      throw IoError("bad group '" + group + "' in " + path);
    }
    data.examples.push_back(std::move(e));
  }
  data.validate();
  return data;
}

// ---------------------------------------------------------------------------
// Ground-truth sidecar: id,ability,t,true_attendance,true_orders_pa,true_orders

void write_truth_csv(const std::vector<GroundTruthRow>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "id,ability,t,true_attendance,true_orders_pa,true_orders\n";
  for (const GroundTruthRow& r : rows) {
    out << r.id << ',' << format_double(r.ability) << ',' << format_double(r.t) << ','
        << format_double(r.true_attendance) << ',' << format_double(r.true_orders_pa) << ','
        << format_double(r.true_orders) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<GroundTruthRow> read_truth_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty truth file: " + path);
  std::vector<GroundTruthRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw IoError("bad row width in " + path);
    rows.push_back({parse_int(f[0], path), parse_double(f[1], path), parse_double(f[2], path),
                    parse_double(f[3], path), parse_double(f[4], path),
                    parse_double(f[5], path)});
  }
  return rows;
}

// ---------------------------------------------------------------------------

void write_curves_csv(const std::vector<ResponseCurve>& curves, const std::string& path) {
  auto out = open_out(path);
  out << "id,t,attendance,orders_pa,orders,natural,incremental\n";
  for (const ResponseCurve& c : curves) {
    for (std::size_t g = 0; g < c.grid.size(); ++g) {
      out << c.id << ',' << format_double(c.grid[g]) << ',' << format_double(c.attendance[g])
          << ',' << format_double(c.orders_pa[g]) << ',' << format_double(c.orders[g]) << ','
          << format_double(c.natural) << ',' << format_double(c.incremental[g]) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_assignment_csv(const Assignment& a, const std::string& path) {
  auto out = open_out(path);
  out << "id,t,cost,pred_incremental\n";
  for (const auto& c : a.choices) {
    out << c.id << ',' << format_double(c.t) << ',' << format_double(c.cost) << ','
        << format_double(c.predicted_incremental) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Model file

void save_model(const MmceModel& model, const std::string& path) {
  auto out = open_out(path);
  const ModelConfig& cfg = model.config();
  out << "MMCE-MODEL v1\n";
  out << "scheme " << scheme_name(cfg.scheme) << '\n';
  out << "head " << head_kind_name(cfg.head) << '\n';
  out << "features " << cfg.feature_width << '\n';
  out << "hidden";
  for (std::size_t h : cfg.hidden) out << ' ' << h;
  out << '\n';
  out << "ceiling " << format_double(cfg.hyper.ceiling) << '\n';
  out << "max_treatment " << cfg.hyper.max_treatment << '\n';
  out << "grid";
  for (double t : cfg.grid.levels) out << ' ' << format_double(t);
  out << '\n';
  for (const auto& g : model.store().groups()) {
    out << "group " << g.name << ' ' << g.values.size() << '\n';
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      out << format_double(g.values[i]) << (i + 1 == g.values.size() ? '\n' : ' ');
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

MmceModel load_model(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "MMCE-MODEL v1") {
    throw ConfigError("unsupported model file version in " + path);
  }
  ModelConfig cfg;
  ParameterStore store;
  std::string key;
  while (in >> key) {
    if (key == "scheme") {
      std::string v;
      in >> v;
      cfg.scheme = scheme_from_name(v);
    } else if (key == "head") {
      std::string v;
      in >> v;
      cfg.head = head_kind_from_name(v);
    } else if (key == "features") {
      in >> cfg.feature_width;
    } else if (key == "hidden") {
      cfg.hidden.clear();
      std::getline(in, line);
      std::istringstream ss(line);
      std::size_t h;
      while (ss >> h) cfg.hidden.push_back(h);
    } else if (key == "ceiling") {
      in >> cfg.hyper.ceiling;
    } else if (key == "max_treatment") {
      in >> cfg.hyper.max_treatment;
    } else if (key == "grid") {
      cfg.grid.levels.clear();
      std::getline(in, line);
      std::istringstream ss(line);
      double t;
      while (ss >> t) cfg.grid.levels.push_back(t);
    } else if (key == "group") {
      std::string name;
      std::size_t len = 0;
      in >> name >> len;
      std::vector<double> values(len);
      for (double& v : values) {
        if (!(in >> v)) throw IoError("truncated group " + name + " in " + path);
      }
      store.add_group(name, std::move(values));
    } else {
      throw IoError("unknown model file key '" + key + "' in " + path);
    }
  }
  return MmceModel::from_parts(std::move(cfg), std::move(store));
}

// ---------------------------------------------------------------------------

void write_eval_report(const EvalReport& report, const PositivityReport& positivity,
                       const std::string& path) {
  auto out = open_out(path);
  out << "monotonicity_score=" << format_double(report.monotonicity) << '\n';
  out << "stratification_score=" << format_double(report.stratification) << '\n';
  out << "marginal_effect_score=" << format_double(report.marginal_effect) << '\n';
  out << "gini_score=" << format_double(report.gini) << '\n';
  out << "flagged_bins=" << report.flagged_bins << '\n';
  out << "macro_monotonicity=" << format_double(report.verdict.macro_monotonicity) << '\n';
  out << "eligible=" << (report.verdict.eligible ? "true" : "false") << '\n';
  for (const auto& reason : report.verdict.reasons) {
    out << "reason=" << reason << '\n';
  }
  if (report.curve_mae_vs_truth >= 0.0) {
    out << "curve_mae_vs_truth=" << format_double(report.curve_mae_vs_truth) << '\n';
  }
  for (const auto& bin : positivity.bins) {
    if (bin.flagged) {
      out << "flagged_bin=feature:" << bin.feature << ",bin:" << bin.bin << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Run config

RunConfig RunConfig::parse_file(const std::string& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.find('=');
    if (pos == std::string::npos) throw ConfigError("bad config line: " + line);
    kv[line.substr(0, pos)] = line.substr(pos + 1);
  }
  return parse(kv);
}

RunConfig RunConfig::parse(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "n_riders") {
      cfg.gen.n_riders = static_cast<std::size_t>(parse_int(value, key));
    } else if (key == "feature_width") {
      cfg.gen.feature_width = static_cast<std::size_t>(parse_int(value, key));
    } else if (key == "bias_strength") {
      cfg.gen.bias_strength = parse_double(value, key);
    } else if (key == "blank_fraction") {
      cfg.gen.blank_fraction = parse_double(value, key);
    } else if (key == "t_max") {
      cfg.gen.t_max = parse_double(value, key);
    } else if (key == "noise_scale") {
      cfg.gen.noise_scale = parse_double(value, key);
    } else if (key == "seed") {
      cfg.gen.seed = static_cast<std::uint64_t>(parse_int(value, key));
      cfg.train.seed = cfg.gen.seed;
    } else if (key == "scheme") {
      cfg.model.scheme = scheme_from_name(value);
    } else if (key == "head") {
      cfg.model.head = head_kind_from_name(value);
    } else if (key == "hidden") {
      cfg.model.hidden.clear();
      for (const auto& part : split(value, ',')) {
        cfg.model.hidden.push_back(static_cast<std::size_t>(parse_int(part, key)));
      }
    } else if (key == "ceiling") {
      cfg.model.hyper.ceiling = parse_double(value, key);
      cfg.ceiling_explicit = true;
    } else if (key == "max_treatment") {
      cfg.model.hyper.max_treatment = static_cast<int>(parse_int(value, key));
    } else if (key == "weight_p") {
      cfg.train.weight_p = parse_double(value, key);
    } else if (key == "weight_o") {
      cfg.train.weight_o = parse_double(value, key);
    } else if (key == "epochs") {
      cfg.train.epochs = static_cast<int>(parse_int(value, key));
    } else if (key == "batch_size") {
      cfg.train.batch_size = static_cast<std::size_t>(parse_int(value, key));
    } else if (key == "learning_rate") {
      cfg.train.learning_rate = parse_double(value, key);
    } else if (key == "n_bins") {
      cfg.eligibility.n_bins = static_cast<std::size_t>(parse_int(value, key));
    } else if (key == "mono_threshold") {
      cfg.eligibility.monotonicity_threshold = parse_double(value, key);
    } else if (key == "sutva") {
      if (value != "true" && value != "false") throw ConfigError("sutva must be true|false");
      cfg.eligibility.sutva_affirmed = value == "true";
    } else if (key == "important_features") {
      cfg.eligibility.important_features.clear();
      for (const auto& part : split(value, ',')) {
        cfg.eligibility.important_features.push_back(
            static_cast<std::size_t>(parse_int(part, key)));
      }
    } else if (key == "budget") {
      cfg.budget = parse_double(value, key);
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  cfg.gen.validate();
  cfg.model.feature_width = cfg.gen.feature_width;
  cfg.model.grid = cfg.gen.grid();
  cfg.model.validate();
  cfg.train.validate();
  if (cfg.budget < 0.0) throw ConfigError("budget must be >= 0");
  return cfg;
}

}  // namespace mmce::io
