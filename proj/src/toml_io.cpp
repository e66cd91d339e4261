// Every TOML reader lives here so toml++ is compiled once.
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "noniid/io.hpp"
#include "noniid/scenario.hpp"

namespace noniid {

namespace {

std::string quoted(const std::string& key) { return "`" + key + "`"; }

std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

/// Typed access to one TOML table that records problems instead of throwing
/// and remembers which keys were read, so leftovers can be reported.
class Fields {
 public:
  Fields(const toml::table& table, std::string prefix, std::vector<std::string>& problems)
      : table_(table), prefix_(std::move(prefix)), problems_(problems) {}

  bool has(const std::string& key) const { return table_.contains(key); }

  void fail(const std::string& key, const std::string& message) {
    problems_.push_back(quoted(join_key(prefix_, key)) + ": " + message);
  }

  void require(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) fail(key, "missing required key");
  }

  std::optional<long long> integer(const std::string& key) {
    const toml::node* node = take(key);
    if (!node) return std::nullopt;
    if (auto v = node->value_exact<int64_t>()) return *v;
    fail(key, "expected an integer");
    return std::nullopt;
  }

  std::optional<double> number(const std::string& key) {
    const toml::node* node = take(key);
    if (!node) return std::nullopt;
    if (node->is_number()) return *node->value<double>();
    fail(key, "expected a number");
    return std::nullopt;
  }

  std::optional<std::string> string(const std::string& key) {
    const toml::node* node = take(key);
    if (!node) return std::nullopt;
    if (auto v = node->value_exact<std::string>()) return *v;
    fail(key, "expected a string");
    return std::nullopt;
  }

  const toml::array* array(const std::string& key) {
    const toml::node* node = take(key);
    if (!node) return nullptr;
    if (const auto* a = node->as_array()) return a;
    fail(key, "expected an array");
    return nullptr;
  }

  const toml::table* table(const std::string& key) {
    const toml::node* node = take(key);
    if (!node) return nullptr;
    if (const auto* t = node->as_table()) return t;
    fail(key, "expected a table");
    return nullptr;
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const toml::array* a = array(key);
    if (!a) return std::nullopt;
    std::vector<double> out;
    for (const auto& e : *a) {
      if (!e.is_number()) {
        fail(key, "expected an array of numbers");
        return std::nullopt;
      }
      out.push_back(*e.value<double>());
    }
    return out;
  }

  std::optional<std::vector<long long>> integers(const std::string& key) {
    const toml::array* a = array(key);
    if (!a) return std::nullopt;
    std::vector<long long> out;
    for (const auto& e : *a) {
      auto v = e.value_exact<int64_t>();
      if (!v) {
        fail(key, "expected an array of integers");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const toml::array* a = array(key);
    if (!a) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& e : *a) {
      auto v = e.value_exact<std::string>();
      if (!v) {
        fail(key, "expected an array of strings");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }

  /// Reports keys that were never read.
  void reject_unknown() {
    for (const auto& [key, node] : table_) {
      const std::string k(key.str());
      if (!seen_.count(k)) fail(k, "unknown key");
    }
  }

  /// Marks a key as consumed without reading it.
  void allow(const std::string& key) { seen_.insert(key); }

  const std::string& prefix() const { return prefix_; }

 private:
  const toml::node* take(const std::string& key) {
    seen_.insert(key);
    return table_.get(key);
  }

  const toml::table& table_;
  std::string prefix_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

toml::table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({quoted(path.string()) + ": cannot open file"});
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return toml::parse(buffer.str(), path.string());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << quoted(path.string()) << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError({msg.str()});
  }
}

template <typename Scalar>
std::optional<Scalar> parse_entry(const toml::node& node) {
  if (auto s = node.value_exact<std::string>()) {
    try {
      Rational r(*s);
      if constexpr (is_exact_v<Scalar>) {
        return r;
      } else {
        return boost::multiprecision::mpq_rational(r).convert_to<double>();
      }
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (node.is_number()) return Scalar(*node.value<double>());
  return std::nullopt;
}

constexpr double kNormalizationTol = 1e-9;

template <typename Scalar>
std::optional<BasicBehavior<Scalar>> behavior_from_table(const toml::table& table, const std::string& prefix,
                                                         std::vector<std::string>& problems) {
  Fields f(table, prefix, problems);
  f.require("input_size");
  f.require("output_size");
  f.require("probs");
  const auto x_size = f.integer("input_size");
  const auto a_size = f.integer("output_size");
  const toml::array* probs = f.array("probs");
  f.reject_unknown();
  if (!x_size || !a_size || !probs) return std::nullopt;
  if (*x_size < 1) f.fail("input_size", "must be >= 1");
  if (*a_size < 2) f.fail("output_size", "must be >= 2");
  if (*x_size < 1 || *a_size < 2) return std::nullopt;
  const auto X = static_cast<int>(*x_size);
  const auto A = static_cast<int>(*a_size);
  if (static_cast<long long>(probs->size()) != static_cast<long long>(X) * A) {
    f.fail("probs", "expected " + std::to_string(X * A) + " entries (input_size * output_size), got " +
                        std::to_string(probs->size()));
    return std::nullopt;
  }
  Mat<Scalar> t(A, X);
  bool ok = true;
  for (int x = 0; x < X; ++x) {
    for (int a = 0; a < A; ++a) {
      const auto v = parse_entry<Scalar>((*probs)[static_cast<std::size_t>(x * A + a)]);
      if (!v) {
        f.fail("probs", "entry " + std::to_string(x * A + a) + " is not a number or fraction");
        ok = false;
        continue;
      }
      if (*v < Scalar(0)) {
        f.fail("probs", "entry " + std::to_string(x * A + a) + " is negative");
        ok = false;
      }
      t(a, x) = *v;
    }
  }
  if (!ok) return std::nullopt;
  for (int x = 0; x < X; ++x) {
    const Scalar sum = t.col(x).sum();
    const double drift = std::abs(to_double(Scalar(sum - Scalar(1))));
    if (drift > kNormalizationTol) {
      f.fail("probs", "column for input " + std::to_string(x) + " sums to " + std::to_string(to_double(sum)));
      ok = false;
    } else if (sum != Scalar(1)) {
      t.col(x) /= sum;
    }
  }
  if (!ok) return std::nullopt;
  return BasicBehavior<Scalar>(Alphabet(X, A), std::move(t));
}

template <typename Scalar>
BasicBehavior<Scalar> read_behavior_impl(const std::filesystem::path& path) {
  const toml::table root = parse_file(path);
  std::vector<std::string> problems;
  auto b = behavior_from_table<Scalar>(root, "", problems);
  if (!problems.empty()) {
    for (auto& p : problems) p = path.string() + ": " + p;
    throw ConfigError(std::move(problems));
  }
  return std::move(*b);
}

template <typename Scalar>
std::vector<BasicBehavior<Scalar>> read_set_impl(const std::filesystem::path& path) {
  const toml::table root = parse_file(path);
  if (!root.contains("behavior")) return {read_behavior_impl<Scalar>(path)};
  std::vector<std::string> problems;
  Fields f(root, "", problems);
  const toml::array* list = f.array("behavior");
  f.reject_unknown();
  std::vector<BasicBehavior<Scalar>> out;
  if (list) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string prefix = "behavior[" + std::to_string(i) + "]";
      const auto* t = (*list)[i].as_table();
      if (!t) {
        problems.push_back(quoted(prefix) + ": expected a table");
        continue;
      }
      if (auto b = behavior_from_table<Scalar>(*t, prefix, problems)) out.push_back(std::move(*b));
    }
    if (list->empty()) problems.push_back(quoted("behavior") + ": the set is empty");
  }
  if (problems.empty() && !out.empty()) {
    for (std::size_t i = 1; i < out.size(); ++i)
      if (!(out[i].alphabet() == out[0].alphabet()))
        problems.push_back(quoted("behavior[" + std::to_string(i) + "]") + ": alphabet differs from behavior[0]");
  }
  if (!problems.empty()) {
    for (auto& p : problems) p = path.string() + ": " + p;
    throw ConfigError(std::move(problems));
  }
  return out;
}

std::optional<Mat<double>> matrix_rows(Fields& f, const std::string& key, int rows, int cols) {
  const toml::array* a = f.array(key);
  if (!a) return std::nullopt;
  if (static_cast<int>(a->size()) != rows) {
    f.fail(key, "expected " + std::to_string(rows) + " rows, got " + std::to_string(a->size()));
    return std::nullopt;
  }
  Mat<double> m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto* row = (*a)[static_cast<std::size_t>(r)].as_array();
    if (!row || static_cast<int>(row->size()) != cols) {
      f.fail(key, "row " + std::to_string(r) + " must hold " + std::to_string(cols) + " numbers");
      return std::nullopt;
    }
    for (int c = 0; c < cols; ++c) {
      const auto& e = (*row)[static_cast<std::size_t>(c)];
      if (!e.is_number()) {
        f.fail(key, "row " + std::to_string(r) + " has a non-numeric entry");
        return std::nullopt;
      }
      m(r, c) = *e.value<double>();
    }
  }
  return m;
}

std::optional<std::array<int, 3>> triple(Fields& f, const std::string& key, long long lo, long long hi) {
  const auto v = f.integers(key);
  if (!v) return std::nullopt;
  if (v->size() != 3) {
    f.fail(key, "expected three integers");
    return std::nullopt;
  }
  std::array<int, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if ((*v)[i] < lo || (*v)[i] > hi) {
      f.fail(key, "entries must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return std::nullopt;
    }
    out[i] = static_cast<int>((*v)[i]);
  }
  return out;
}

}  // namespace

Behavior read_behavior(const std::filesystem::path& path) { return read_behavior_impl<double>(path); }
RationalBehavior read_rational_behavior(const std::filesystem::path& path) {
  return read_behavior_impl<Rational>(path);
}
std::vector<Behavior> read_behavior_set(const std::filesystem::path& path) { return read_set_impl<double>(path); }
std::vector<RationalBehavior> read_rational_behavior_set(const std::filesystem::path& path) {
  return read_set_impl<Rational>(path);
}

TriangleLocalModel read_triangle_model_json(const std::filesystem::path& path);  // io_json.cpp

TriangleLocalModel read_triangle_model(const std::filesystem::path& path) {
  if (path.extension() == ".json") return read_triangle_model_json(path);
  const toml::table root = parse_file(path);
  std::vector<std::string> problems;
  Fields f(root, "", problems);
  f.require("supports");
  TriangleLocalModel m;
  if (auto s = triple(f, "supports", 1, 64)) m.supports = *s;
  if (f.has("outputs"))
    if (auto o = triple(f, "outputs", 2, 64)) m.outputs = *o;
  for (int i = 0; i < 3; ++i) {
    const std::string p = "p" + std::to_string(i + 1);
    f.require(p);
    if (auto v = f.numbers(p)) {
      if (static_cast<int>(v->size()) != m.supports[i]) f.fail(p, "length must equal supports[" + std::to_string(i) + "]");
      else m.sources[i] = Eigen::Map<const Vec<double>>(v->data(), static_cast<Eigen::Index>(v->size()));
    }
  }
  for (int i = 0; i < 3; ++i) {
    const std::string q = "q" + std::to_string(i + 1);
    f.require(q);
    const auto [u, v] = TriangleLocalModel::parent_sources(i);
    if (auto r = matrix_rows(f, q, m.supports[u] * m.supports[v], m.outputs[i])) m.responses[i] = *r;
  }
  f.reject_unknown();
  if (problems.empty()) {
    try {
      m.validate(kNormalizationTol);
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    for (auto& p : problems) p = path.string() + ": " + p;
    throw ConfigError(std::move(problems));
  }
  return m;
}

namespace {

std::optional<DeterministicStrategy> strategy_from(Fields& f, const std::vector<std::string>& outputs,
                                                   std::vector<int> party_outputs) {
  if (party_outputs.empty()) party_outputs.assign(outputs.size(), 2);
  if (party_outputs.size() != outputs.size()) {
    f.fail("party_outputs", "needs one entry per party string");
    return std::nullopt;
  }
  DeterministicStrategy s;
  s.party_outputs = party_outputs;
  for (std::size_t p = 0; p < outputs.size(); ++p) {
    std::vector<int> row;
    for (char c : outputs[p]) {
      const int v = c - '0';
      if (c < '0' || c > '9' || v >= party_outputs[p]) {
        f.fail("outputs", "party " + std::to_string(p + 1) + " has invalid symbol '" + std::string(1, c) + "'");
        return std::nullopt;
      }
      row.push_back(v);
    }
    s.outputs.push_back(std::move(row));
  }
  try {
    s.validate();
  } catch (const Error& e) {
    f.fail("outputs", e.what());
    return std::nullopt;
  }
  return s;
}

}  // namespace

DeterministicStrategy read_strategy(const std::filesystem::path& path) {
  const toml::table root = parse_file(path);
  std::vector<std::string> problems;
  Fields f(root, "", problems);
  f.require("outputs");
  const auto outputs = f.strings("outputs");
  std::vector<int> party_outputs;
  if (auto po = f.integers("party_outputs"))
    for (auto v : *po) party_outputs.push_back(static_cast<int>(v));
  f.reject_unknown();
  std::optional<DeterministicStrategy> s;
  if (outputs && problems.empty()) s = strategy_from(f, *outputs, party_outputs);
  if (!problems.empty()) {
    for (auto& p : problems) p = path.string() + ": " + p;
    throw ConfigError(std::move(problems));
  }
  return std::move(*s);
}

// ---------------------------------------------------------------------------
// Scenario configs.

namespace {

std::optional<ScenarioKind> scenario_kind(const std::string& s) {
  if (s == "iid") return ScenarioKind::Iid;
  if (s == "clock") return ScenarioKind::Clock;
  if (s == "shared_sequence") return ScenarioKind::SharedSequence;
  if (s == "meta") return ScenarioKind::Meta;
  if (s == "triangle_local") return ScenarioKind::TriangleLocal;
  if (s == "custom") return ScenarioKind::Custom;
  return std::nullopt;
}

std::optional<TestKind> test_kind(const std::string& s) {
  if (s == "ksigma") return TestKind::KSigma;
  if (s == "martingale") return TestKind::Martingale;
  if (s == "decision_table") return TestKind::DecisionTable;
  return std::nullopt;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
  const std::filesystem::path p(file);
  return p.is_absolute() ? p : base / p;
}

void parse_device(const toml::table* table, ScenarioConfig& cfg, std::vector<std::string>& problems) {
  static const toml::table empty;
  Fields f(table ? *table : empty, "device", problems);
  switch (cfg.scenario) {
    case ScenarioKind::Iid:
      if (auto b = f.string("behavior")) cfg.device.behavior = *b;
      if (!is_behavior_preset(cfg.device.behavior) &&
          !std::filesystem::exists(resolve(cfg.base_dir, cfg.device.behavior)))
        f.fail("behavior", "neither a preset (pc, p0, p1) nor an existing file: " + cfg.device.behavior);
      break;
    case ScenarioKind::Clock:
      if (auto o = triple(f, "offsets", 0, 1)) cfg.device.offsets = *o;
      break;
    case ScenarioKind::SharedSequence:
      if (auto s = f.integers("sequence")) {
        for (auto v : *s) {
          if (v != 0 && v != 1) {
            f.fail("sequence", "entries must be 0 or 1");
            break;
          }
          cfg.device.sequence.push_back(static_cast<int>(v));
        }
        if (cfg.n > 0 && static_cast<int>(cfg.device.sequence.size()) < cfg.n)
          f.fail("sequence", "needs at least n = " + std::to_string(cfg.n) + " entries");
      }
      break;
    case ScenarioKind::Meta:
      break;
    case ScenarioKind::TriangleLocal:
      if (auto m = f.string("model")) {
        cfg.device.model = *m;
        if (!std::filesystem::exists(resolve(cfg.base_dir, *m))) f.fail("model", "file not found: " + *m);
      }
      if (auto r = f.integer("restarts")) {
        if (*r < 1) f.fail("restarts", "must be >= 1");
        else cfg.device.restarts = static_cast<int>(*r);
      }
      if (auto s = triple(f, "supports", 1, 8)) cfg.device.supports = *s;
      break;
    case ScenarioKind::Custom: {
      if (auto s = f.string("strategy")) {
        cfg.device.strategy = *s;
        if (!std::filesystem::exists(resolve(cfg.base_dir, *s))) f.fail("strategy", "file not found: " + *s);
      }
      if (auto o = f.strings("outputs")) {
        cfg.device.outputs = *o;
        if (strategy_from(f, *o, {})) {
          if (cfg.n > 0 && static_cast<int>(o->front().size()) < cfg.n)
            f.fail("outputs", "strategy covers fewer than n = " + std::to_string(cfg.n) + " rounds");
        }
      }
      if (cfg.device.strategy.empty() == cfg.device.outputs.empty())
        f.fail("strategy", "custom scenarios need exactly one of `device.strategy` or `device.outputs`");
      break;
    }
  }
  f.reject_unknown();
}

void parse_parameters(const toml::table* table, ScenarioConfig& cfg, std::vector<std::string>& problems) {
  static const toml::table empty;
  Fields f(table ? *table : empty, "parameters", problems);
  auto& p = cfg.parameters;
  if (auto v = f.numbers("input_dist")) p.input_dist = *v;
  switch (cfg.test) {
    case TestKind::KSigma:
      if (auto s = f.string("functional")) {
        if (*s != "entropy" && *s != "linear") f.fail("functional", "must be `entropy` or `linear`");
        p.functional = *s;
      }
      if (auto v = f.numbers("coeffs")) p.coeffs = *v;
      if (auto v = f.numbers("weights")) p.weights = *v;
      if (auto v = f.number("alpha")) p.alpha = *v;
      if (auto v = f.number("k")) {
        if (*v < 0) f.fail("k", "must be >= 0");
        p.k_sigma = *v;
      }
      if (auto v = f.integer("bootstrap_resamples")) {
        if (*v < 2) f.fail("bootstrap_resamples", "must be >= 2");
        p.bootstrap_resamples = static_cast<int>(*v);
      }
      if (auto v = f.integer("bootstrap_seed")) p.bootstrap_seed = static_cast<std::uint64_t>(*v);
      if (p.functional == "linear" && p.coeffs.empty()) f.fail("coeffs", "required by the linear functional");
      if (p.functional == "entropy" && !p.coeffs.empty()) f.fail("coeffs", "not used by the entropy functional");
      break;
    case TestKind::Martingale:
      f.require("coeffs");
      if (auto v = f.numbers("coeffs")) p.coeffs = *v;
      if (auto v = f.numbers("weights")) p.weights = *v;
      if (auto v = f.number("alpha")) p.alpha = *v;
      if (auto v = f.number("epsilon")) {
        if (!(*v > 0 && *v < 1)) f.fail("epsilon", "must lie in (0, 1)");
        p.epsilon = *v;
      }
      break;
    case TestKind::DecisionTable:
      f.require("table");
      if (auto v = f.numbers("table")) {
        p.table = *v;
        for (double q : p.table)
          if (q < 0 || q > 1) {
            f.fail("table", "entries are probabilities in [0, 1]");
            break;
          }
      }
      break;
  }
  f.reject_unknown();
}

void check_shapes(ScenarioConfig& cfg, std::vector<std::string>& problems) {
  Alphabet alphabet;
  try {
    alphabet = scenario_alphabet(cfg);
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    return;
  } catch (const Error& e) {
    problems.push_back(quoted("device") + ": " + e.what());
    return;
  }
  const auto& p = cfg.parameters;
  const auto X = static_cast<std::size_t>(alphabet.input_size);
  const auto A = static_cast<std::size_t>(alphabet.output_size);
  if (!p.input_dist.empty()) {
    double sum = 0;
    bool negative = false;
    for (double q : p.input_dist) {
      sum += q;
      negative = negative || q < 0;
    }
    if (p.input_dist.size() != X)
      problems.push_back(quoted("parameters.input_dist") + ": expected " + std::to_string(X) + " entries");
    else if (negative || std::abs(sum - 1.0) > kNormalizationTol)
      problems.push_back(quoted("parameters.input_dist") + ": must be a probability vector");
  }
  if (!p.coeffs.empty() && p.coeffs.size() != X * A)
    problems.push_back(quoted("parameters.coeffs") + ": expected " + std::to_string(X * A) +
                       " entries (input_size * output_size)");
  if (!p.weights.empty() && p.weights.size() != X)
    problems.push_back(quoted("parameters.weights") + ": expected " + std::to_string(X) + " entries");
  if (cfg.test == TestKind::KSigma && p.functional == "entropy" && !(alphabet == triangle_alphabet()))
    problems.push_back(quoted("parameters.functional") + ": the entropy functional needs three binary parties");
  if (cfg.test == TestKind::DecisionTable && cfg.n > 0) {
    const double size = std::pow(static_cast<double>(X * A), cfg.n);
    if (size > kMaxExactStates)
      problems.push_back(quoted("parameters.table") + ": (A*X)^n exceeds 1e7 entries");
    else if (static_cast<double>(p.table.size()) != size)
      problems.push_back(quoted("parameters.table") + ": expected " + std::to_string(static_cast<long>(size)) +
                         " entries ((A*X)^n)");
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError({msg.str()});
  }
  std::vector<std::string> problems;
  ScenarioConfig cfg;
  cfg.base_dir = base_dir;
  Fields f(root, "", problems);
  f.require("scenario");
  f.require("test");
  f.require("n");
  bool kinds_ok = true;
  if (auto s = f.string("scenario")) {
    if (auto k = scenario_kind(*s)) cfg.scenario = *k;
    else {
      f.fail("scenario", "unknown scenario '" + *s + "' (iid, clock, shared_sequence, meta, triangle_local, custom)");
      kinds_ok = false;
    }
  } else {
    kinds_ok = false;
  }
  if (auto s = f.string("test")) {
    if (auto k = test_kind(*s)) cfg.test = *k;
    else {
      f.fail("test", "unknown test '" + *s + "' (ksigma, martingale, decision_table)");
      kinds_ok = false;
    }
  } else {
    kinds_ok = false;
  }
  if (auto v = f.integer("n")) {
    if (*v < 1) f.fail("n", "must be >= 1 (got " + std::to_string(*v) + ")");
    else cfg.n = static_cast<int>(*v);
  }
  if (auto v = f.integer("trials")) {
    if (*v < 1) f.fail("trials", "must be >= 1 (got " + std::to_string(*v) + ")");
    else cfg.trials = static_cast<long>(*v);
  }
  if (auto v = f.integer("seed")) {
    if (*v < 0) f.fail("seed", "must be >= 0");
    else cfg.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = f.integer("threads")) {
    if (*v < 1) f.fail("threads", "must be >= 1");
    else cfg.threads = static_cast<int>(*v);
  }
  if (auto v = f.string("regime")) {
    if (*v != "unlimited" && *v != "bounded" && *v != "banned")
      f.fail("regime", "must be unlimited, bounded or banned");
    cfg.regime = *v;
  }
  const toml::table* device = f.table("device");
  const toml::table* parameters = f.table("parameters");
  if (const toml::table* output = f.table("output")) {
    Fields o(*output, "output", problems);
    if (auto v = o.string("report")) cfg.output.report = *v;
    if (auto v = o.string("trace")) cfg.output.trace = *v;
    if (auto v = o.integer("trace_trials")) {
      if (*v < 0) o.fail("trace_trials", "must be >= 0");
      else cfg.output.trace_trials = static_cast<long>(*v);
    }
    o.reject_unknown();
  }
  f.reject_unknown();
  if (kinds_ok) {
    parse_device(device, cfg, problems);
    parse_parameters(parameters, cfg, problems);
    if (problems.empty()) check_shapes(cfg, problems);
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({quoted(path.string()) + ": cannot open file"});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::vector<std::string> validate_config(const std::filesystem::path& path) {
  try {
    load_config(path);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

}  // namespace noniid
