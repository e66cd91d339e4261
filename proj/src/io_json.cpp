#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "noniid/io.hpp"

namespace noniid {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out;
  for (const auto& p : problems) out += (out.empty() ? "" : "; ") + p;
  return out;
}

template <typename Scalar>
Json scalar_json(const Scalar& v) {
  if constexpr (is_exact_v<Scalar>) {
    return v.str();
  } else {
    return v;
  }
}

Json flat_json(const Mat<double>& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i]);
  return out;
}

Json rows_json(const Mat<double>& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Json complex_rows_json(const Eigen::MatrixXcd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    out.push_back(std::move(row));
  }
  return out;
}

template <typename Scalar>
Json membership_json(const MembershipResult<Scalar>& result) {
  Json j;
  if (const auto* dec = std::get_if<BasicConvexDecomposition<Scalar>>(&result)) {
    j["type"] = "decomposition";
    j["indices"] = dec->indices;
    Json w = Json::array();
    for (const auto& v : dec->weights) w.push_back(scalar_json(v));
    j["weights"] = std::move(w);
    j["residual"] = dec->residual;
  } else {
    const auto& sep = std::get<BasicSeparatingFunctional<Scalar>>(result);
    j["type"] = "separation";
    j["rows"] = sep.coeffs.rows();
    j["cols"] = sep.coeffs.cols();
    Json c = Json::array();
    for (Eigen::Index i = 0; i < sep.coeffs.size(); ++i) c.push_back(scalar_json(Scalar(sep.coeffs.data()[i])));
    j["coeffs"] = std::move(c);
    j["alpha"] = scalar_json(sep.alpha);
    j["margin"] = scalar_json(sep.margin);
  }
  return j;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error("invalid configuration: " + join_problems(problems)), problems_(std::move(problems)) {}

bool is_behavior_preset(const std::string& name) { return name == "pc" || name == "p0" || name == "p1"; }

Behavior behavior_preset(const std::string& name) {
  if (name == "pc") return p_c();
  if (name == "p0") return triangle_point(0);
  if (name == "p1") return triangle_point(1);
  throw ConfigError({"`" + name + "`: unknown behavior preset (pc, p0, p1)"});
}

Behavior load_behavior(const std::string& name) {
  return is_behavior_preset(name) ? behavior_preset(name) : read_behavior(name);
}

Eigen::MatrixXcd read_matrix(std::istream& in) {
  long dim = 0;
  if (!(in >> dim) || dim < 1 || dim > 4096) throw ConfigError({"`dimension`: expected a positive integer header"});
  Eigen::MatrixXcd m(dim, dim);
  for (long r = 0; r < dim; ++r)
    for (long c = 0; c < dim; ++c) {
      double re = 0, im = 0;
      if (!(in >> re >> im))
        throw ConfigError({"`entries`: expected " + std::to_string(dim * dim) + " (re, im) pairs, input ended at entry " +
                           std::to_string(r * dim + c)});
      m(r, c) = {re, im};
    }
  return m;
}

Eigen::MatrixXcd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"`" + path.string() + "`: cannot open file"});
  return read_matrix(in);
}

TriangleLocalModel read_triangle_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"`" + path.string() + "`: cannot open file"});
  Json j;
  try {
    j = Json::parse(in);
    if (j.contains("model")) j = j.at("model");
    TriangleLocalModel m;
    m.supports = j.at("supports").get<std::array<int, 3>>();
    if (j.contains("outputs")) m.outputs = j.at("outputs").get<std::array<int, 3>>();
    for (int i = 0; i < 3; ++i) {
      const auto p = j.at("p" + std::to_string(i + 1)).get<std::vector<double>>();
      m.sources[i] = Eigen::Map<const Vec<double>>(p.data(), static_cast<Eigen::Index>(p.size()));
      const auto q = j.at("q" + std::to_string(i + 1)).get<std::vector<std::vector<double>>>();
      m.responses[i].resize(static_cast<Eigen::Index>(q.size()), q.empty() ? 0 : static_cast<Eigen::Index>(q[0].size()));
      for (std::size_t r = 0; r < q.size(); ++r) {
        if (q[r].size() != q[0].size()) throw InvalidBehavior("ragged response table q" + std::to_string(i + 1));
        for (std::size_t c = 0; c < q[r].size(); ++c)
          m.responses[i](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = q[r][c];
      }
    }
    m.validate(1e-9);
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError({"`" + path.string() + "`: " + e.what()});
  } catch (const Error& e) {
    throw ConfigError({"`" + path.string() + "`: " + e.what()});
  }
}

// ---------------------------------------------------------------------------

Json to_json(const Interval& ci) { return Json::array({ci.lo, ci.hi}); }

Json to_json(const TestReport& report) {
  Json j;
  j["test"] = report.test;
  j["n"] = report.n;
  j["trials"] = report.trials;
  j["accept_rate"] = report.accept_rate;
  j["ci95"] = to_json(report.ci95);
  j["seed"] = report.seed;
  j["wall_time_s"] = report.wall_time_s;
  j["device"] = report.device;
  j["accepted"] = report.accepted;
  if (report.first_trial_frequencies) {
    const auto& f = *report.first_trial_frequencies;
    Json counts = Json::array();
    for (Eigen::Index i = 0; i < f.counts.size(); ++i) counts.push_back(f.counts.data()[i]);
    j["first_trial_counts"] = std::move(counts);
  }
  return j;
}

Json to_json(const DemoReport& report) {
  Json j;
  j["test"] = report.test;
  j["n"] = report.n;
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["best_local_distance"] = report.best_local_distance;
  Json entries = Json::array();
  for (const auto& e : report.entries) {
    Json row;
    row["device"] = e.device;
    if (e.report) {
      row["accept_rate"] = e.report->accept_rate;
      row["ci95"] = to_json(e.report->ci95);
      row["seed"] = e.report->seed;
      row["wall_time_s"] = e.report->wall_time_s;
      if (e.report->first_trial_frequencies) {
        const auto& f = *e.report->first_trial_frequencies;
        Json counts = Json::array();
        for (Eigen::Index i = 0; i < f.counts.size(); ++i) counts.push_back(f.counts.data()[i]);
        row["first_trial_counts"] = std::move(counts);
      }
    } else {
      row["accept_rate"] = nullptr;
    }
    if (!e.note.empty()) row["note"] = e.note;
    entries.push_back(std::move(row));
  }
  j["devices"] = std::move(entries);
  return j;
}

Json to_json(const TriangleLocalModel& model) {
  Json j;
  j["supports"] = model.supports;
  j["outputs"] = model.outputs;
  for (int i = 0; i < 3; ++i) {
    std::vector<double> p(model.sources[i].data(), model.sources[i].data() + model.sources[i].size());
    j["p" + std::to_string(i + 1)] = p;
  }
  for (int i = 0; i < 3; ++i) j["q" + std::to_string(i + 1)] = rows_json(model.responses[i]);
  return j;
}

Json to_json(const ApproxResult& result) {
  Json j;
  j["label"] = result.label;
  j["value"] = result.value;
  j["best_restart"] = result.best_restart;
  j["restart_values"] = result.restart_values;
  j["distribution"] = flat_json(result.distribution.probs());
  j["model"] = to_json(result.model);
  return j;
}

Json to_json(const DeterministicMax& result) {
  Json j;
  j["max_prob"] = result.max_prob;
  j["evaluated"] = result.evaluated;
  j["optimal_count"] = result.argmax.size();
  Json list = Json::array();
  for (const auto& s : result.argmax) list.push_back(to_string(s));
  j["argmax"] = std::move(list);
  if (!result.argmax.empty()) j["meta_strategy"] = to_string(result.argmax.front());
  return j;
}

Json to_json(const ExposednessReport& report) {
  Json j;
  j["samples"] = report.samples;
  j["min_value"] = report.min_value;
  j["argmin_distance"] = report.argmin_distance;
  j["second_smallest"] = report.second_smallest;
  j["identity_max_error"] = report.identity_max_error;
  j["unique_minimum"] = report.unique_minimum;
  Json gaps = Json::array();
  for (const auto& [t, count] : report.gap_violations) gaps.push_back({{"distance", t}, {"violations", count}});
  j["gap_violations"] = std::move(gaps);
  j["argmin"] = complex_rows_json(report.argmin);
  return j;
}

Json to_json(const Behavior& behavior) {
  Json j;
  j["input_size"] = behavior.alphabet().input_size;
  j["output_size"] = behavior.alphabet().output_size;
  j["probs"] = flat_json(behavior.probs());
  return j;
}

Json to_json(const MembershipResult<double>& result) { return membership_json(result); }
Json to_json(const MembershipResult<Rational>& result) { return membership_json(result); }

void write_json(const Json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out) {
  out << "trial,round,x,a,statistic,pvalue\n";
  auto number = [&](double v) {
    if (std::isnan(v)) {
      out << "";
    } else {
      std::ostringstream s;
      s.precision(17);
      s << v;
      out << s.str();
    }
  };
  for (const auto& r : rows) {
    out << r.trial << ',' << r.round << ',' << r.x << ',' << r.a << ',';
    number(r.statistic);
    out << ',';
    number(r.p_value);
    out << '\n';
  }
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_trace_csv(rows, out);
}

}  // namespace noniid
