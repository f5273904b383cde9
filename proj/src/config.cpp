#include "netgame/config.hpp"

#include "netgame/async.hpp"
#include "netgame/graph.hpp"
#include "netgame/io.hpp"

#include <fstream>
#include <sstream>

namespace netgame {

using nlohmann::json;

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::sync: return "sync";
    case Mode::async_updates: return "async";
    case Mode::timevarying: return "timevarying";
    case Mode::gnwe: return "gnwe";
    case Mode::demo_fj: return "demo-fj";
    case Mode::demo_degroot: return "demo-degroot";
    case Mode::demo_lasso: return "demo-lasso";
    case Mode::validate_graph: return "validate-graph";
  }
  throw ConfigError("mode_name: unknown mode");
}

Mode mode_from_name(const std::string& name) {
  if (name == "sync") return Mode::sync;
  if (name == "async") return Mode::async_updates;
  if (name == "timevarying") return Mode::timevarying;
  if (name == "gnwe") return Mode::gnwe;
  if (name == "demo-fj") return Mode::demo_fj;
  if (name == "demo-degroot") return Mode::demo_degroot;
  if (name == "demo-lasso") return Mode::demo_lasso;
  if (name == "validate-graph") return Mode::validate_graph;
  throw ConfigError("field 'mode': unknown value '" + name +
                    "' (expected sync|async|timevarying|gnwe|demo-fj|demo-degroot|demo-lasso|validate-graph)");
}

namespace {

[[noreturn]] void type_error(const std::string& field, const char* expected) {
  throw ConfigError("field '" + field + "': expected " + expected);
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) type_error(field, "a number");
  return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) type_error(field, "an integer");
  return j.get<std::int64_t>();
}

bool as_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) type_error(field, "a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) type_error(field, "a string");
  return j.get<std::string>();
}

Vec as_vector(const json& j, const std::string& field) {
  if (!j.is_array()) type_error(field, "an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) type_error(field, "an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Mat as_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) type_error(field, "an array of number arrays");
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) type_error(field, "a rectangular array of number arrays");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) type_error(field, "an array of number arrays");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

/// A matrix field is either {"inline": [[...]]} or {"csv": "path"}.
Mat matrix_field(const json& j, const std::string& field) {
  if (j.is_array()) return as_matrix(j, field);
  if (j.is_object()) {
    if (j.contains("inline")) return as_matrix(j["inline"], field + ".inline");
    if (j.contains("csv")) return read_csv_matrix(as_string(j["csv"], field + ".csv"));
  }
  type_error(field, "an inline matrix or {\"csv\": path} / {\"inline\": [[...]]}");
}

MapSpec parse_map(const json& j, const std::string& field) {
  if (!j.is_object()) type_error(field, "a map object with a 'kind'");
  if (!j.contains("kind")) throw ConfigError("field '" + field + ".kind': expected a string (missing)");
  MapSpec spec;
  spec.kind = as_string(j["kind"], field + ".kind");
  if (j.contains("lo") || j.contains("hi")) {
    if (!j.contains("lo") || !j.contains("hi"))
      throw ConfigError("field '" + field + "': a box needs both lo and hi");
    spec.lo = as_vector(j["lo"], field + ".lo");
    spec.hi = as_vector(j["hi"], field + ".hi");
    if (spec.lo.size() != spec.hi.size()) throw ConfigError("field '" + field + "': lo/hi lengths differ");
    spec.has_box = true;
  }
  if (j.contains("dim")) spec.dim = static_cast<int>(as_integer(j["dim"], field + ".dim"));
  if (j.contains("x0")) spec.anchor = as_vector(j["x0"], field + ".x0");
  if (j.contains("mu")) spec.stubbornness = as_number(j["mu"], field + ".mu");
  if (j.contains("tau")) spec.tau = as_number(j["tau"], field + ".tau");
  if (j.contains("B")) spec.data = matrix_field(j["B"], field + ".B");
  if (j.contains("y")) spec.observations = as_vector(j["y"], field + ".y");
  if (j.contains("inner_tol")) spec.inner_tol = as_number(j["inner_tol"], field + ".inner_tol");

  if (spec.kind != "box" && spec.kind != "identity" && spec.kind != "fj" && spec.kind != "l1" &&
      spec.kind != "least_squares_l1")
    throw ConfigError("field '" + field + ".kind': unknown kind '" + spec.kind + "'");
  if (spec.kind == "box" && !spec.has_box) throw ConfigError("field '" + field + "': box map needs lo/hi");
  if (spec.kind == "identity" && spec.dim < 1)
    throw ConfigError("field '" + field + "': identity map needs a positive dim");
  if (spec.kind == "l1" && !spec.has_box && spec.dim < 1)
    throw ConfigError("field '" + field + "': l1 map needs lo/hi or dim");
  if (spec.kind == "fj" && (spec.anchor.size() == 0 || !spec.has_box))
    throw ConfigError("field '" + field + "': fj map needs x0 and lo/hi");
  if (spec.kind == "least_squares_l1" && (spec.data.size() == 0 || spec.observations.size() == 0))
    throw ConfigError("field '" + field + "': least_squares_l1 map needs B and y");
  return spec;
}

void warn_async_delay(ExperimentConfig& config) {
  if (config.mode != Mode::async_updates || !config.matrix) return;
  const Mat& a = *config.matrix;
  if (a.rows() != a.cols()) return;
  const int n = static_cast<int>(a.rows());
  double p_min = 1.0 / n;
  if (!config.async.probs.empty()) {
    p_min = config.async.probs.front();
    for (double p : config.async.probs) p_min = std::min(p_min, p);
  }
  const double floor = a.diagonal().minCoeff();
  if (!(floor > 0.0) || !(p_min > 0.0)) return;
  const double bound = delay_bound(n, p_min, floor);
  if (static_cast<double>(config.async.max_delay) >= bound) {
    std::ostringstream os;
    os << "async.max_delay = " << config.async.max_delay
       << " is not strictly below the admissible delay bound " << bound
       << "; convergence is not guaranteed";
    config.warnings.push_back(os.str());
  }
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  auto mat_eq = [](const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  auto opt_mat_eq = [&](const std::optional<Mat>& a, const std::optional<Mat>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || mat_eq(*a, *b);
  };
  auto opt_vec_eq = [&](const std::optional<Vec>& a, const std::optional<Vec>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->size() == b->size() && *a == *b);
  };
  if (!(mode == other.mode && out_dir == other.out_dir && seeds == other.seeds && tol == other.tol &&
        max_iter == other.max_iter && store_every == other.store_every && quiet == other.quiet &&
        signal == other.signal && random_signal_length == other.random_signal_length &&
        maps == other.maps && x0_random == other.x0_random && relaxation == other.relaxation &&
        async == other.async && demo == other.demo))
    return false;
  if (!opt_mat_eq(matrix, other.matrix) || !opt_vec_eq(x0, other.x0)) return false;
  if (matrices.size() != other.matrices.size()) return false;
  for (std::size_t i = 0; i < matrices.size(); ++i)
    if (!mat_eq(matrices[i], other.matrices[i])) return false;
  if (gnwe.has_value() != other.gnwe.has_value()) return false;
  if (gnwe && !(mat_eq(gnwe->coupling, other.gnwe->coupling) && gnwe->rhs == other.gnwe->rhs &&
                gnwe->equalities == other.gnwe->equalities && gnwe->gamma == other.gnwe->gamma))
    return false;
  return true;
}

ExperimentConfig parse_config_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root: expected an object");
  if (!j.contains("mode")) throw ConfigError("field 'mode': expected a string (missing)");

  ExperimentConfig config;
  config.mode = mode_from_name(as_string(j["mode"], "mode"));

  if (j.contains("out_dir")) config.out_dir = as_string(j["out_dir"], "out_dir");
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array() || j["seeds"].empty()) type_error("seeds", "a nonempty array of integers");
    config.seeds.clear();
    for (std::size_t i = 0; i < j["seeds"].size(); ++i)
      config.seeds.push_back(
          static_cast<std::uint64_t>(as_integer(j["seeds"][i], "seeds[" + std::to_string(i) + "]")));
  }
  if (j.contains("tol")) config.tol = as_number(j["tol"], "tol");
  if (j.contains("max_iter")) config.max_iter = as_integer(j["max_iter"], "max_iter");
  if (j.contains("store_every")) config.store_every = as_integer(j["store_every"], "store_every");
  if (j.contains("quiet")) config.quiet = as_bool(j["quiet"], "quiet");

  if (j.contains("matrix")) config.matrix = matrix_field(j["matrix"], "matrix");
  if (j.contains("matrices")) {
    if (!j["matrices"].is_array()) type_error("matrices", "an array of matrices");
    for (std::size_t i = 0; i < j["matrices"].size(); ++i)
      config.matrices.push_back(matrix_field(j["matrices"][i], "matrices[" + std::to_string(i) + "]"));
  }
  if (j.contains("signal")) {
    if (!j["signal"].is_array()) type_error("signal", "an array of matrix indices");
    for (std::size_t i = 0; i < j["signal"].size(); ++i)
      config.signal.push_back(
          static_cast<int>(as_integer(j["signal"][i], "signal[" + std::to_string(i) + "]")));
  }
  if (j.contains("random_signal_length"))
    config.random_signal_length = as_integer(j["random_signal_length"], "random_signal_length");

  if (j.contains("maps")) {
    if (!j["maps"].is_array()) type_error("maps", "an array of map objects");
    for (std::size_t i = 0; i < j["maps"].size(); ++i)
      config.maps.push_back(parse_map(j["maps"][i], "maps[" + std::to_string(i) + "]"));
  }
  if (j.contains("x0")) {
    if (j["x0"].is_string() && j["x0"].get<std::string>() == "random")
      config.x0_random = true;
    else
      config.x0 = as_vector(j["x0"], "x0");
  }
  if (j.contains("relaxation")) {
    const double alpha = as_number(j["relaxation"], "relaxation");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("field 'relaxation': expected a number in (0,1)");
    config.relaxation = alpha;
  }

  if (j.contains("async")) {
    const json& a = j["async"];
    if (!a.is_object()) type_error("async", "an object");
    if (a.contains("probs")) {
      const Vec p = as_vector(a["probs"], "async.probs");
      config.async.probs.assign(p.data(), p.data() + p.size());
    }
    if (a.contains("max_delay"))
      config.async.max_delay = static_cast<int>(as_integer(a["max_delay"], "async.max_delay"));
    if (a.contains("psi")) config.async.psi = as_number(a["psi"], "async.psi");
    if (a.contains("delay_model")) config.async.delay_model = as_string(a["delay_model"], "async.delay_model");
    if (a.contains("window")) config.async.window = static_cast<int>(as_integer(a["window"], "async.window"));
    if (config.async.delay_model != "uniform_random" && config.async.delay_model != "fixed" &&
        config.async.delay_model != "adversarial_max")
      throw ConfigError("field 'async.delay_model': expected uniform_random|fixed|adversarial_max");
  }

  if (j.contains("gnwe")) {
    const json& g = j["gnwe"];
    if (!g.is_object()) type_error("gnwe", "an object");
    GnweSection section;
    if (!g.contains("C")) throw ConfigError("field 'gnwe.C': expected a matrix (missing)");
    section.coupling = matrix_field(g["C"], "gnwe.C");
    if (!g.contains("c")) throw ConfigError("field 'gnwe.c': expected an array of numbers (missing)");
    section.rhs = as_vector(g["c"], "gnwe.c");
    if (g.contains("equalities")) section.equalities = as_bool(g["equalities"], "gnwe.equalities");
    if (g.contains("gamma")) section.gamma = as_number(g["gamma"], "gnwe.gamma");
    config.gnwe = std::move(section);
  }

  if (j.contains("demo")) {
    const json& d = j["demo"];
    if (!d.is_object()) type_error("demo", "an object");
    if (d.contains("agents")) config.demo.agents = static_cast<int>(as_integer(d["agents"], "demo.agents"));
    if (d.contains("topics")) config.demo.topics = static_cast<int>(as_integer(d["topics"], "demo.topics"));
    if (d.contains("sigma_max")) config.demo.sigma_max = as_number(d["sigma_max"], "demo.sigma_max");
    if (d.contains("sigma_grid")) {
      const Vec g = as_vector(d["sigma_grid"], "demo.sigma_grid");
      config.demo.sigma_grid.assign(g.data(), g.data() + g.size());
    }
    if (d.contains("tau")) config.demo.tau = as_number(d["tau"], "demo.tau");
    if (d.contains("rows")) config.demo.rows = static_cast<int>(as_integer(d["rows"], "demo.rows"));
    if (d.contains("dim")) config.demo.dim = static_cast<int>(as_integer(d["dim"], "demo.dim"));
  }

  // Mode-required fields.
  const bool needs_matrix = config.mode == Mode::sync || config.mode == Mode::async_updates ||
                            config.mode == Mode::gnwe || config.mode == Mode::validate_graph;
  if (needs_matrix && !config.matrix)
    throw ConfigError("field 'matrix': required for mode " + mode_name(config.mode));
  const bool needs_maps = config.mode == Mode::sync || config.mode == Mode::async_updates ||
                          config.mode == Mode::timevarying || config.mode == Mode::gnwe;
  if (needs_maps && config.maps.empty())
    throw ConfigError("field 'maps': required for mode " + mode_name(config.mode));
  if (config.mode == Mode::timevarying && config.matrices.empty())
    throw ConfigError("field 'matrices': required for mode timevarying");
  if (config.mode == Mode::gnwe && !config.gnwe)
    throw ConfigError("field 'gnwe': required for mode gnwe");
  if (config.seeds.empty()) throw ConfigError("field 'seeds': must be nonempty");

  warn_async_delay(config);
  return config;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("parse_config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  const bool is_toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  json j;
  if (is_toml) {
    j = toml_subset_to_json(text);
  } else {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& err) {
      throw ConfigError(std::string("parse_config: invalid JSON: ") + err.what());
    }
  }
  return parse_config_json(j);
}

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json dump_config(const ExperimentConfig& config) {
  json j;
  j["mode"] = mode_name(config.mode);
  j["out_dir"] = config.out_dir;
  j["seeds"] = config.seeds;
  j["tol"] = config.tol;
  j["max_iter"] = config.max_iter;
  j["store_every"] = config.store_every;
  j["quiet"] = config.quiet;
  if (config.matrix) j["matrix"] = mat_json(*config.matrix);
  if (!config.matrices.empty()) {
    json arr = json::array();
    for (const Mat& m : config.matrices) arr.push_back(mat_json(m));
    j["matrices"] = arr;
  }
  if (!config.signal.empty()) j["signal"] = config.signal;
  if (config.random_signal_length > 0) j["random_signal_length"] = config.random_signal_length;
  if (!config.maps.empty()) {
    json arr = json::array();
    for (const MapSpec& spec : config.maps) {
      json m;
      m["kind"] = spec.kind;
      if (spec.has_box) {
        m["lo"] = vec_json(spec.lo);
        m["hi"] = vec_json(spec.hi);
      }
      if (spec.anchor.size() > 0) m["x0"] = vec_json(spec.anchor);
      if (spec.kind == "fj") m["mu"] = spec.stubbornness;
      if (spec.kind == "l1" || spec.kind == "least_squares_l1") m["tau"] = spec.tau;
      if (spec.data.size() > 0) m["B"] = mat_json(spec.data);
      if (spec.observations.size() > 0) m["y"] = vec_json(spec.observations);
      if (spec.kind == "least_squares_l1") m["inner_tol"] = spec.inner_tol;
      if (spec.dim > 0) m["dim"] = spec.dim;
      arr.push_back(std::move(m));
    }
    j["maps"] = arr;
  }
  if (config.x0_random)
    j["x0"] = "random";
  else if (config.x0)
    j["x0"] = vec_json(*config.x0);
  if (config.relaxation) j["relaxation"] = *config.relaxation;
  if (config.mode == Mode::async_updates) {
    json a;
    if (!config.async.probs.empty()) a["probs"] = config.async.probs;
    a["max_delay"] = config.async.max_delay;
    a["psi"] = config.async.psi;
    a["delay_model"] = config.async.delay_model;
    a["window"] = config.async.window;
    j["async"] = a;
  }
  if (config.gnwe) {
    json g;
    g["C"] = mat_json(config.gnwe->coupling);
    g["c"] = vec_json(config.gnwe->rhs);
    g["equalities"] = config.gnwe->equalities;
    if (config.gnwe->gamma) g["gamma"] = *config.gnwe->gamma;
    j["gnwe"] = g;
  }
  if (config.mode == Mode::demo_fj || config.mode == Mode::demo_degroot || config.mode == Mode::demo_lasso) {
    json d;
    d["agents"] = config.demo.agents;
    d["topics"] = config.demo.topics;
    d["sigma_max"] = config.demo.sigma_max;
    if (!config.demo.sigma_grid.empty()) d["sigma_grid"] = config.demo.sigma_grid;
    d["tau"] = config.demo.tau;
    d["rows"] = config.demo.rows;
    d["dim"] = config.demo.dim;
    j["demo"] = d;
  }
  return j;
}

namespace {

struct TomlCursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void advance() {
    if (text[pos] == '\n') ++line;
    ++pos;
  }
  void skip_inline_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t')) advance();
  }
};

[[noreturn]] void toml_error(const TomlCursor& cur, const std::string& what) {
  throw ConfigError("toml line " + std::to_string(cur.line) + ": " + what);
}

json parse_toml_value(TomlCursor& cur);

json parse_toml_array(TomlCursor& cur) {
  json arr = json::array();
  cur.advance();  // consume '['
  while (true) {
    while (!cur.done() &&
           (cur.peek() == ' ' || cur.peek() == '\t' || cur.peek() == '\n' || cur.peek() == '\r'))
      cur.advance();
    if (cur.done()) toml_error(cur, "unterminated array");
    if (cur.peek() == ']') {
      cur.advance();
      return arr;
    }
    arr.push_back(parse_toml_value(cur));
    while (!cur.done() &&
           (cur.peek() == ' ' || cur.peek() == '\t' || cur.peek() == '\n' || cur.peek() == '\r'))
      cur.advance();
    if (cur.done()) toml_error(cur, "unterminated array");
    if (cur.peek() == ',') {
      cur.advance();
      continue;
    }
    if (cur.peek() == ']') {
      cur.advance();
      return arr;
    }
    toml_error(cur, "expected ',' or ']' in array");
  }
}

json parse_toml_inline_table(TomlCursor& cur) {
  json obj = json::object();
  cur.advance();  // consume '{'
  while (true) {
    cur.skip_inline_ws();
    if (cur.done()) toml_error(cur, "unterminated inline table");
    if (cur.peek() == '}') {
      cur.advance();
      return obj;
    }
    std::string key;
    while (!cur.done() && cur.peek() != '=' && cur.peek() != '}') {
      key.push_back(cur.peek());
      cur.advance();
    }
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (cur.done() || cur.peek() != '=') toml_error(cur, "expected '=' in inline table");
    cur.advance();
    obj[key] = parse_toml_value(cur);
    cur.skip_inline_ws();
    if (!cur.done() && cur.peek() == ',') cur.advance();
  }
}

json parse_toml_value(TomlCursor& cur) {
  cur.skip_inline_ws();
  if (cur.done()) toml_error(cur, "expected a value");
  const char c = cur.peek();
  if (c == '[') return parse_toml_array(cur);
  if (c == '{') return parse_toml_inline_table(cur);
  if (c == '"') {
    cur.advance();
    std::string out;
    while (!cur.done() && cur.peek() != '"') {
      if (cur.peek() == '\\') {
        cur.advance();
        if (cur.done()) toml_error(cur, "bad escape");
      }
      out.push_back(cur.peek());
      cur.advance();
    }
    if (cur.done()) toml_error(cur, "unterminated string");
    cur.advance();
    return json(out);
  }
  std::string token;
  while (!cur.done() && cur.peek() != ',' && cur.peek() != ']' && cur.peek() != '}' &&
         cur.peek() != '\n' && cur.peek() != '#' && cur.peek() != '\r') {
    token.push_back(cur.peek());
    cur.advance();
  }
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t')) token.pop_back();
  if (token == "true") return json(true);
  if (token == "false") return json(false);
  try {
    std::size_t used = 0;
    if (token.find('.') == std::string::npos && token.find('e') == std::string::npos &&
        token.find('E') == std::string::npos) {
      const long long v = std::stoll(token, &used);
      if (used == token.size()) return json(v);
    }
    const double v = std::stod(token, &used);
    if (used == token.size()) return json(v);
  } catch (const std::exception&) {
  }
  toml_error(cur, "cannot parse value '" + token + "'");
}

}  // namespace

json toml_subset_to_json(const std::string& text) {
  json root = json::object();
  json* table = &root;
  TomlCursor cur{text};

  while (!cur.done()) {
    cur.skip_inline_ws();
    if (cur.done()) break;
    const char c = cur.peek();
    if (c == '\n' || c == '\r') {
      cur.advance();
      continue;
    }
    if (c == '#') {
      while (!cur.done() && cur.peek() != '\n') cur.advance();
      continue;
    }
    if (c == '[') {
      cur.advance();
      std::string name;
      while (!cur.done() && cur.peek() != ']') {
        name.push_back(cur.peek());
        cur.advance();
      }
      if (cur.done()) toml_error(cur, "unterminated table header");
      cur.advance();
      root[name] = json::object();
      table = &root[name];
      continue;
    }
    std::string key;
    while (!cur.done() && cur.peek() != '=' && cur.peek() != '\n') {
      key.push_back(cur.peek());
      cur.advance();
    }
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (cur.done() || cur.peek() != '=') toml_error(cur, "expected '=' after key '" + key + "'");
    cur.advance();
    (*table)[key] = parse_toml_value(cur);
  }
  return root;
}

}  // namespace netgame
