// File formats: behaviors, behavior sets, triangle models, strategies and
// density matrices in; JSON reports and trace CSV out.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "noniid/convexity.hpp"
#include "noniid/devices.hpp"
#include "noniid/hypothesis.hpp"
#include "noniid/selftest.hpp"
#include "noniid/triangle.hpp"

namespace noniid {

/// One or more problems with a user-supplied file; every message names the
/// offending key.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Readers (TOML unless noted).
//
// Behavior file:
//   input_size = 1
//   output_size = 8
//   probs = [0.5, 0, 0, 0, 0, 0, 0, 0.5]   # x-major: probs[x * A + a]
// Entries may be numbers or exact fractions written as strings ("1/3").
// Columns off by more than 1e-9 are rejected, smaller drift is renormalized.
//
// Behavior set file: an array of tables [[behavior]] with the same keys. A
// plain behavior file reads as a one-element set.

/// Named presets: pc, p0, p1 (triangle alphabet).
bool is_behavior_preset(const std::string& name);
Behavior behavior_preset(const std::string& name);

Behavior read_behavior(const std::filesystem::path& path);
RationalBehavior read_rational_behavior(const std::filesystem::path& path);
std::vector<Behavior> read_behavior_set(const std::filesystem::path& path);
std::vector<RationalBehavior> read_rational_behavior_set(const std::filesystem::path& path);

/// Preset name or path.
Behavior load_behavior(const std::string& name);

/// supports = [s1, s2, s3]; p1..p3 source weights; q1..q3 response rows
/// (arrays of arrays). JSON files written by `approx` are accepted as well.
TriangleLocalModel read_triangle_model(const std::filesystem::path& path);

/// outputs = ["0101", "0101", "0101"] (one string per party, one symbol per
/// round) and optional party_outputs = [2, 2, 2].
DeterministicStrategy read_strategy(const std::filesystem::path& path);

/// Plain text: the dimension D, then D*D "re im" pairs in row-major order.
Eigen::MatrixXcd read_matrix(std::istream& in);
Eigen::MatrixXcd read_matrix(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON.

Json to_json(const Interval& ci);
Json to_json(const TestReport& report);
Json to_json(const DemoReport& report);
Json to_json(const TriangleLocalModel& model);
Json to_json(const ApproxResult& result);
Json to_json(const DeterministicMax& result);
Json to_json(const ExposednessReport& report);
Json to_json(const Behavior& behavior);
Json to_json(const MembershipResult<double>& result);
Json to_json(const MembershipResult<Rational>& result);

/// Writes `j` with two-space indentation and a trailing newline, to a file or
/// to stdout when the path is empty or "-".
void write_json(const Json& j, const std::string& path);

/// trial,round,x,a,statistic,pvalue
void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out);
void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path);

}  // namespace noniid
