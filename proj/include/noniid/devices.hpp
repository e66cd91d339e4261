// Device samplers: iid, scheduled, memory and triangle-local behaviors.
#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "noniid/correlations.hpp"

namespace noniid {

/// A device answers one query given the full past transcript.
///
/// Implementations are immutable: the output distribution is a function of
/// (x, history) only, and all randomness comes from the caller's stream. The
/// same instance can therefore serve many trials concurrently.
class DeviceModel {
 public:
  virtual ~DeviceModel() = default;
  virtual int respond(int x, History history, Rng& rng) const = 0;
  virtual Alphabet alphabet() const = 0;
  virtual std::string descriptor() const = 0;
};

using DevicePtr = std::shared_ptr<const DeviceModel>;

/// Outputs per party for the three-party triangle scenario.
inline constexpr std::array<int, 3> kBinaryTriple{2, 2, 2};

DevicePtr iid_device(Behavior behavior);

/// Party i outputs offsets[i] xor (k mod 2) in zero-based round k.
DevicePtr clock_device(std::array<int, 3> offsets);

/// All parties output sequence[k] in round k.
DevicePtr shared_sequence_device(std::vector<int> sequence);

// ---------------------------------------------------------------------------
// Deterministic multi-party strategies.

/// Fixed per-party output sequences; outputs[i][k] is party i's symbol in
/// round k. Without inputs or inter-round stimulus, a party's memory can only
/// select such a sequence, so these cover every deterministic n-round behavior.
struct DeterministicStrategy {
  std::vector<int> party_outputs;          // alphabet size per party
  std::vector<std::vector<int>> outputs;   // [party][round]

  int parties() const { return static_cast<int>(outputs.size()); }
  int rounds() const { return outputs.empty() ? 0 : static_cast<int>(outputs.front().size()); }
  /// Flattened joint output of round k.
  int joint_output(int k) const;
  void validate() const;

  friend bool operator==(const DeterministicStrategy&, const DeterministicStrategy&) = default;
};

DeterministicStrategy clock_strategy(std::array<int, 3> offsets, int rounds);
std::string to_string(const DeterministicStrategy& strategy);

DevicePtr strategy_device(DeterministicStrategy strategy);

/// Exact n-round behavior of a strategy: point masses on its outputs.
template <typename Scalar>
NRoundBehavior<Scalar> strategy_behavior(const DeterministicStrategy& strategy, int inputs = 1) {
  strategy.validate();
  int joint = 1;
  for (int a : strategy.party_outputs) joint *= a;
  std::vector<BasicBehavior<Scalar>> rounds;
  for (int k = 0; k < strategy.rounds(); ++k)
    rounds.push_back(BasicBehavior<Scalar>::point_mass({inputs, joint}, strategy.joint_output(k)));
  auto out = product_behavior(std::move(rounds));
  out.descriptor = "strategy";
  return out;
}

// ---------------------------------------------------------------------------
// Triangle network.

/// Classical triangle model
///   P(a1,a2,a3) = sum p1(l1) p2(l2) p3(l3) q1(a1|l1,l3) q2(a2|l1,l2) q3(a3|l2,l3).
///
/// responses[i] has one row per parent pair and one column per output; the row
/// for party i's parents (u, v) = parent_sources(i) is u * supports[v] + v.
struct TriangleLocalModel {
  std::array<int, 3> supports{4, 4, 4};
  std::array<int, 3> outputs = kBinaryTriple;
  std::array<Vec<double>, 3> sources;
  std::array<Mat<double>, 3> responses;

  /// Source indices read by party i: A1 <- (L1, L3), A2 <- (L1, L2), A3 <- (L2, L3).
  static constexpr std::array<int, 2> parent_sources(int party) {
    constexpr std::array<std::array<int, 2>, 3> parents{{{0, 2}, {0, 1}, {1, 2}}};
    return parents[static_cast<std::size_t>(party)];
  }

  int response_row(int party, const std::array<int, 3>& lambda) const {
    const auto [u, v] = parent_sources(party);
    return lambda[u] * supports[v] + lambda[v];
  }

  Alphabet alphabet() const { return {1, outputs[0] * outputs[1] * outputs[2]}; }

  /// Throws InvalidBehavior when shapes or normalizations are off.
  void validate(double tol = 1e-12) const;

  /// All sources and responses filled with fresh random simplex points.
  static TriangleLocalModel random(std::array<int, 3> supports, Rng& rng,
                                   std::array<int, 3> outputs = kBinaryTriple);
  /// Every party outputs `value` deterministically.
  static TriangleLocalModel constant(int value = 0, std::array<int, 3> supports = {1, 1, 1});
};

std::array<int, 3> triangle_sample(const TriangleLocalModel& model, Rng& rng);

inline constexpr long kMaxTriangleSupport = 10'000'000;

/// Exact P(a1,a2,a3) by summing over every source configuration.
Behavior triangle_exact_distribution(const TriangleLocalModel& model);

/// iid device sampling the triangle model round by round.
DevicePtr triangle_device(TriangleLocalModel model);

/// Random point of the probability simplex (flat Dirichlet).
Vec<double> random_simplex_point(int size, Rng& rng);

}  // namespace noniid
