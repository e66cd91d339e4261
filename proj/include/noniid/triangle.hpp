// Triangle-network assets: the GHZ-type point P_c, witnesses, a heuristic
// best-local-approximation search, the lexicographic meta-strategy and the
// memory-attack demonstration.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "noniid/correlations.hpp"
#include "noniid/devices.hpp"
#include "noniid/hypothesis.hpp"

namespace noniid {

/// Three binary parties, no inputs: X = 1, A = 8, outputs flattened
/// party-major as a1 * 4 + a2 * 2 + a3.
Alphabet triangle_alphabet();

/// P(0,0,0) = P(1,1,1) = 1/2.
Behavior p_c();
/// P_b: every party outputs b.
Behavior triangle_point(int bit);

/// Marginal distribution of one party (0-based) of a flattened three-party behavior.
Vec<double> party_marginal(const Behavior& p, int party, std::array<int, 3> outputs = kBinaryTriple);

/// F(P) = P(0,0,0) + P(1,1,1).
LinearWitness agreement_witness(double alpha);

/// F(P) = I(A1:A2) + I(A1:A3) - H(A1) in bits. Every triangle-local
/// distribution satisfies F <= 0, while F(P_c) = 1.
double triangle_entropy_witness(const Behavior& p);

// ---------------------------------------------------------------------------
// Best local approximation (heuristic upper bound on the distance to the
// triangle-local set).

struct DistanceObjective {};
/// Maximize F(P) over local models.
struct WitnessObjective {
  LinearWitness witness;
};
using ApproxObjective = std::variant<DistanceObjective, WitnessObjective>;

struct ApproxOptions {
  std::array<int, 3> supports{4, 4, 4};
  int restarts = 50;
  int max_sweeps = 500;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
};

struct ApproxResult {
  TriangleLocalModel model;
  Behavior distribution;
  double value = 0.0;  // l1 distance (minimized) or witness value (maximized)
  int best_restart = 0;
  std::vector<double> restart_values;
  std::string label = "heuristic";
};

/// Block-coordinate search over (p_i, q_i) with random restarts. The model
/// is multilinear, so each block subproblem is solved exactly: an l1 fit LP
/// for the distance objective, a per-simplex argmax for a witness.
ApproxResult best_local_approx(const Behavior& target, const ApproxObjective& objective,
                               const ApproxOptions& options = {});

// ---------------------------------------------------------------------------

/// First optimal deterministic strategy in lexicographic order of
/// (party 1 bits, party 2 bits, party 3 bits).
DeterministicStrategy meta_strategy(const HypothesisTest& test, int n,
                                    const std::vector<int>& party_outputs = {2, 2, 2});

struct DemoEntry {
  std::string device;
  std::optional<TestReport> report;  // absent when the device was skipped
  std::string note;
};

struct DemoReport {
  std::string test;
  int n = 0;
  long trials = 0;
  std::uint64_t seed = 0;
  double best_local_distance = 0.0;
  std::vector<DemoEntry> entries;
};

struct DemoOptions {
  int n = 1000;
  long trials = 1000;
  std::uint64_t seed = 7;
  double k_sigma = 3.0;
  int threads = 1;
  ApproxOptions approx;
};

/// Entropic K-sigma test for P_c: rejects iff F(P~) > 0 + K sigma with
/// F = triangle_entropy_witness.
HypothesisTest pc_ksigma_test(int n, double k_sigma = 3.0, std::uint64_t bootstrap_seed = 0);

/// Runs the iid-designed test against the iid P_c device, the clock, a
/// desynchronized clock, a shared random sequence, the meta-strategy (when
/// enumerable) and the best local iid device.
DemoReport attack_demo(const HypothesisTest& test, const DemoOptions& options);

}  // namespace noniid
