#include "rps/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rps/expression.hpp"
#include "rps/io.hpp"

namespace rps {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  const char* b = s.data();
  auto [ptr, ec] = std::from_chars(b, b + s.size(), v);
  if (ec != std::errc{} || ptr != b + s.size())
    throw ConfigError("bad numeric value for '" + key + "': " + s);
  return v;
}

int64_t parse_int(const std::string& s, const std::string& key) {
  int64_t v = 0;
  const char* b = s.data();
  auto [ptr, ec] = std::from_chars(b, b + s.size(), v);
  if (ec != std::errc{} || ptr != b + s.size())
    throw ConfigError("bad integer value for '" + key + "': " + s);
  return v;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split(s, ','))
    if (!item.empty()) out.push_back(parse_double(item, key));
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split(s, ','))
    if (!item.empty()) out.push_back(int(parse_int(item, key)));
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  std::map<std::string, std::vector<std::string>> drift_components;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "model") cfg.model_id = value;
    else if (key == "dimension") cfg.dimension = int(parse_int(value, key));
    else if (key == "lambda") cfg.lambda = parse_double_list(value, key);
    else if (key == "drift") cfg.drift = {value};
    else if (key.rfind("drift_", 0) == 0) drift_components[key].push_back(value);
    else if (key == "diffusion") cfg.diffusion = parse_double_list(value, key);
    else if (key == "tau") cfg.tau = parse_double(value, key);
    else if (key == "c_f") cfg.c_f = parse_double(value, key);
    else if (key == "c_g") cfg.c_g = parse_double(value, key);
    else if (key == "gamma") cfg.gamma = parse_double(value, key);
    else if (key == "t0") cfg.t0 = parse_double(value, key);
    else if (key == "T") cfg.T = parse_double(value, key);
    else if (key == "h") cfg.h = parse_double(value, key);
    else if (key == "xi") cfg.xi = parse_double_list(value, key);
    else if (key == "i_list") cfg.i_list = parse_int_list(value, key);
    else if (key == "i_ref") cfg.i_ref = int(parse_int(value, key));
    else if (key == "samples") cfg.n_samples = int(parse_int(value, key));
    else if (key == "seed") cfg.seed = uint64_t(parse_int(value, key));
    else if (key == "k_list") cfg.k_list = parse_int_list(value, key);
    else if (key == "anchor_t") cfg.anchor_t = parse_double(value, key);
    else if (key == "start_t") cfg.start_t = parse_double(value, key);
    else if (key == "window_lo") cfg.window_lo = parse_double(value, key);
    else if (key == "window_hi") cfg.window_hi = parse_double(value, key);
    else if (key == "shift_periods") cfg.shift_periods = int(parse_int(value, key));
    else if (key == "p") cfg.p = int(parse_int(value, key));
    else if (key == "out") cfg.out_dir = value;
    else if (key == "workers") cfg.workers = int(parse_int(value, key));
    else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (!drift_components.empty()) {
    cfg.drift.clear();
    for (int c = 1; c <= cfg.dimension; ++c) {
      const auto it = drift_components.find("drift_" + std::to_string(c));
      if (it == drift_components.end())
        throw ConfigError("missing drift_" + std::to_string(c) + " for dimension " +
                          std::to_string(cfg.dimension));
      cfg.drift.push_back(it->second.back());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& filename) {
  std::ifstream f(filename);
  if (!f) throw ConfigError("cannot open config file " + filename);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  out += "model = " + cfg.model_id + "\n";
  if (cfg.model_id == "custom") {
    out += "dimension = " + std::to_string(cfg.dimension) + "\n";
    out += "lambda = " + join_doubles(cfg.lambda) + "\n";
    if (cfg.drift.size() == 1) {
      out += "drift = " + cfg.drift[0] + "\n";
    } else {
      for (size_t c = 0; c < cfg.drift.size(); ++c)
        out += "drift_" + std::to_string(c + 1) + " = " + cfg.drift[c] + "\n";
    }
    out += "diffusion = " + join_doubles(cfg.diffusion) + "\n";
    out += "tau = " + format_double(cfg.tau) + "\n";
    out += "c_f = " + format_double(cfg.c_f) + "\n";
    out += "c_g = " + format_double(cfg.c_g) + "\n";
    out += "gamma = " + format_double(cfg.gamma) + "\n";
  }
  out += "t0 = " + format_double(cfg.t0) + "\n";
  out += "T = " + format_double(cfg.T) + "\n";
  out += "h = " + format_double(cfg.h) + "\n";
  out += "xi = " + join_doubles(cfg.xi) + "\n";
  out += "i_list = " + join_ints(cfg.i_list) + "\n";
  out += "i_ref = " + std::to_string(cfg.i_ref) + "\n";
  out += "samples = " + std::to_string(cfg.n_samples) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "k_list = " + join_ints(cfg.k_list) + "\n";
  out += "anchor_t = " + format_double(cfg.anchor_t) + "\n";
  out += "start_t = " + format_double(cfg.start_t) + "\n";
  out += "window_lo = " + format_double(cfg.window_lo) + "\n";
  out += "window_hi = " + format_double(cfg.window_hi) + "\n";
  out += "shift_periods = " + std::to_string(cfg.shift_periods) + "\n";
  out += "p = " + std::to_string(cfg.p) + "\n";
  out += "out = " + cfg.out_dir + "\n";
  out += "workers = " + std::to_string(cfg.workers) + "\n";
  return out;
}

SdeModel model_from_config(const ExperimentConfig& cfg) {
  if (cfg.model_id != "custom") return builtin_example(cfg.model_id);

  SdeModel m;
  m.name = "custom";
  m.dimension = cfg.dimension;
  m.lambda_eigs = cfg.lambda;
  m.tau = cfg.tau;
  m.c_f = cfg.c_f;
  m.c_g = cfg.c_g;
  m.gamma = cfg.gamma;
  if (int(cfg.drift.size()) != cfg.dimension)
    throw ConfigError("custom model needs one drift expression per component");
  if (cfg.diffusion.empty()) throw ConfigError("custom model needs a diffusion constant");

  std::vector<expr::NodePtr> components;
  std::vector<expr::NodePtr> jacobian;
  for (int c = 0; c < cfg.dimension; ++c) {
    components.push_back(expr::parse(cfg.drift[size_t(c)], cfg.dimension));
    for (int j = 0; j < cfg.dimension; ++j)
      jacobian.push_back(expr::derivative(components.back(), j));
  }
  const int d = cfg.dimension;
  m.drift = [components, d](double t, const std::vector<double>& x, std::vector<double>& out) {
    for (int c = 0; c < d; ++c) out[size_t(c)] = expr::eval(*components[size_t(c)], t, x);
  };
  m.drift_jacobian = [jacobian, d](double t, const std::vector<double>& x,
                                   std::vector<double>& out) {
    for (int i = 0; i < d * d; ++i) out[size_t(i)] = expr::eval(*jacobian[size_t(i)], t, x);
  };
  std::vector<double> g = cfg.diffusion;
  if (int(g.size()) == 1 && d > 1) g.assign(size_t(d), g[0]);
  if (int(g.size()) != d) throw ConfigError("diffusion list size does not match dimension");
  m.diffusion = [g, d](double, std::vector<double>& out) {
    for (int c = 0; c < d; ++c) out[size_t(c)] = g[size_t(c)];
  };
  return m;
}

}  // namespace rps
