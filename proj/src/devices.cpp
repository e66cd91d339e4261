#include "noniid/devices.hpp"

#include <cmath>
#include <sstream>

namespace noniid {
namespace {

class IidDevice final : public DeviceModel {
 public:
  explicit IidDevice(Behavior behavior) : behavior_(std::move(behavior)) {
    require_valid(behavior_);
    const auto& t = behavior_.probs();
    columns_.resize(static_cast<std::size_t>(t.cols()));
    for (int x = 0; x < t.cols(); ++x) columns_[x].assign(t.col(x).data(), t.col(x).data() + t.rows());
  }

  int respond(int x, History, Rng& rng) const override {
    if (x < 0 || x >= static_cast<int>(columns_.size())) throw SymbolOutOfRange("iid device input");
    return sample_categorical(columns_[static_cast<std::size_t>(x)], rng);
  }
  Alphabet alphabet() const override { return behavior_.alphabet(); }
  std::string descriptor() const override { return "iid"; }

 private:
  Behavior behavior_;
  std::vector<std::vector<double>> columns_;
};

class StrategyDevice final : public DeviceModel {
 public:
  StrategyDevice(DeterministicStrategy strategy, std::string name)
      : strategy_(std::move(strategy)), name_(std::move(name)) {
    strategy_.validate();
    int joint = 1;
    for (int a : strategy_.party_outputs) joint *= a;
    alphabet_ = {1, joint};
  }

  int respond(int, History history, Rng&) const override {
    const auto k = static_cast<int>(history.size());
    if (k >= strategy_.rounds())
      throw SequenceExhausted(name_ + ": only " + std::to_string(strategy_.rounds()) + " rounds scripted");
    return strategy_.joint_output(k);
  }
  Alphabet alphabet() const override { return alphabet_; }
  std::string descriptor() const override { return name_; }

 private:
  DeterministicStrategy strategy_;
  std::string name_;
  Alphabet alphabet_;
};

class ClockDevice final : public DeviceModel {
 public:
  explicit ClockDevice(std::array<int, 3> offsets) : offsets_(offsets) {
    for (int o : offsets)
      if (o != 0 && o != 1) throw SymbolOutOfRange("clock offsets must be bits");
  }

  int respond(int, History history, Rng&) const override {
    const int phase = static_cast<int>(history.size() % 2);
    return ((offsets_[0] ^ phase) << 2) | ((offsets_[1] ^ phase) << 1) | (offsets_[2] ^ phase);
  }
  Alphabet alphabet() const override { return {1, 8}; }
  std::string descriptor() const override {
    return "clock(" + std::to_string(offsets_[0]) + "," + std::to_string(offsets_[1]) + "," +
           std::to_string(offsets_[2]) + ")";
  }

 private:
  std::array<int, 3> offsets_;
};

class TriangleDevice final : public DeviceModel {
 public:
  explicit TriangleDevice(TriangleLocalModel model) : model_(std::move(model)) { model_.validate(); }

  int respond(int, History, Rng& rng) const override {
    const auto a = triangle_sample(model_, rng);
    return pack_symbols(a, model_.outputs);
  }
  Alphabet alphabet() const override { return model_.alphabet(); }
  std::string descriptor() const override { return "triangle_local"; }

 private:
  TriangleLocalModel model_;
};

void check_simplex(const Vec<double>& v, double tol, const std::string& what) {
  if (v.size() == 0) throw InvalidBehavior(what + ": empty distribution");
  if (v.minCoeff() < 0.0) throw InvalidBehavior(what + ": negative probability");
  if (std::abs(v.sum() - 1.0) > tol) throw InvalidBehavior(what + ": not normalized");
}

}  // namespace

DevicePtr iid_device(Behavior behavior) { return std::make_shared<IidDevice>(std::move(behavior)); }

DevicePtr clock_device(std::array<int, 3> offsets) { return std::make_shared<ClockDevice>(offsets); }

DevicePtr shared_sequence_device(std::vector<int> sequence) {
  DeterministicStrategy s;
  s.party_outputs = {2, 2, 2};
  s.outputs = {sequence, sequence, std::move(sequence)};
  return std::make_shared<StrategyDevice>(std::move(s), "shared_sequence");
}

DevicePtr strategy_device(DeterministicStrategy strategy) {
  return std::make_shared<StrategyDevice>(std::move(strategy), "strategy");
}

int DeterministicStrategy::joint_output(int k) const {
  int index = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) index = index * party_outputs[i] + outputs[i][k];
  return index;
}

void DeterministicStrategy::validate() const {
  if (outputs.empty() || outputs.size() != party_outputs.size())
    throw Error("strategy needs one output sequence per party");
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].size() != outputs[0].size()) throw Error("strategy sequences differ in length");
    for (int a : outputs[i])
      if (a < 0 || a >= party_outputs[i]) throw SymbolOutOfRange("strategy symbol out of range");
  }
}

DeterministicStrategy clock_strategy(std::array<int, 3> offsets, int rounds) {
  DeterministicStrategy s;
  s.party_outputs = {2, 2, 2};
  s.outputs.assign(3, std::vector<int>(static_cast<std::size_t>(rounds)));
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < rounds; ++k) s.outputs[i][k] = offsets[i] ^ (k % 2);
  return s;
}

std::string to_string(const DeterministicStrategy& strategy) {
  std::ostringstream os;
  for (std::size_t i = 0; i < strategy.outputs.size(); ++i) {
    if (i) os << ' ';
    for (int a : strategy.outputs[i]) os << a;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

void TriangleLocalModel::validate(double tol) const {
  for (int i = 0; i < 3; ++i) {
    if (supports[i] < 1 || outputs[i] < 2) throw InvalidBehavior("triangle model: bad sizes");
    if (sources[i].size() != supports[i]) throw InvalidBehavior("triangle model: source size mismatch");
    check_simplex(sources[i], tol, "p" + std::to_string(i + 1));
    const auto [u, v] = parent_sources(i);
    const auto& q = responses[i];
    if (q.rows() != supports[u] * supports[v] || q.cols() != outputs[i])
      throw InvalidBehavior("triangle model: response table q" + std::to_string(i + 1) + " has wrong shape");
    for (Eigen::Index r = 0; r < q.rows(); ++r)
      check_simplex(q.row(r).transpose(), tol, "q" + std::to_string(i + 1));
  }
}

Vec<double> random_simplex_point(int size, Rng& rng) {
  Vec<double> v(size);
  for (int i = 0; i < size; ++i) v[i] = -std::log1p(-uniform01(rng));  // Exp(1)
  return v / v.sum();
}

TriangleLocalModel TriangleLocalModel::random(std::array<int, 3> supports, Rng& rng, std::array<int, 3> outputs) {
  TriangleLocalModel m;
  m.supports = supports;
  m.outputs = outputs;
  for (int i = 0; i < 3; ++i) m.sources[i] = random_simplex_point(supports[i], rng);
  for (int i = 0; i < 3; ++i) {
    const auto [u, v] = parent_sources(i);
    m.responses[i].resize(supports[u] * supports[v], outputs[i]);
    for (Eigen::Index r = 0; r < m.responses[i].rows(); ++r)
      m.responses[i].row(r) = random_simplex_point(outputs[i], rng).transpose();
  }
  return m;
}

TriangleLocalModel TriangleLocalModel::constant(int value, std::array<int, 3> supports) {
  TriangleLocalModel m;
  m.supports = supports;
  for (int i = 0; i < 3; ++i) m.sources[i] = Vec<double>::Constant(supports[i], 1.0 / supports[i]);
  for (int i = 0; i < 3; ++i) {
    const auto [u, v] = parent_sources(i);
    m.responses[i] = Mat<double>::Zero(supports[u] * supports[v], m.outputs[i]);
    m.responses[i].col(value).setOnes();
  }
  return m;
}

std::array<int, 3> triangle_sample(const TriangleLocalModel& model, Rng& rng) {
  std::array<int, 3> lambda{};
  for (int i = 0; i < 3; ++i)
    lambda[i] = sample_categorical({model.sources[i].data(), static_cast<std::size_t>(model.sources[i].size())}, rng);
  std::array<int, 3> a{};
  for (int i = 0; i < 3; ++i) {
    const auto& q = model.responses[i];
    const int row = model.response_row(i, lambda);
    double u = uniform01(rng);
    int c = 0;
    for (; c + 1 < q.cols(); ++c) {
      if (u < q(row, c)) break;
      u -= q(row, c);
    }
    a[i] = c;
  }
  return a;
}

Behavior triangle_exact_distribution(const TriangleLocalModel& model) {
  const long configs = static_cast<long>(model.supports[0]) * model.supports[1] * model.supports[2];
  if (configs > kMaxTriangleSupport)
    throw SupportTooLarge("triangle model has " + std::to_string(configs) + " source configurations");
  model.validate(1e-9);
  const auto& [o1, o2, o3] = model.outputs;
  Mat<double> dist = Mat<double>::Zero(o1 * o2 * o3, 1);
  std::array<int, 3> lambda{};
  for (lambda[0] = 0; lambda[0] < model.supports[0]; ++lambda[0]) {
    for (lambda[1] = 0; lambda[1] < model.supports[1]; ++lambda[1]) {
      for (lambda[2] = 0; lambda[2] < model.supports[2]; ++lambda[2]) {
        const double w = model.sources[0][lambda[0]] * model.sources[1][lambda[1]] * model.sources[2][lambda[2]];
        if (w == 0.0) continue;
        const auto r1 = model.responses[0].row(model.response_row(0, lambda));
        const auto r2 = model.responses[1].row(model.response_row(1, lambda));
        const auto r3 = model.responses[2].row(model.response_row(2, lambda));
        for (int a1 = 0; a1 < o1; ++a1)
          for (int a2 = 0; a2 < o2; ++a2)
            for (int a3 = 0; a3 < o3; ++a3) dist((a1 * o2 + a2) * o3 + a3, 0) += w * r1[a1] * r2[a2] * r3[a3];
      }
    }
  }
  return {model.alphabet(), std::move(dist)};
}

DevicePtr triangle_device(TriangleLocalModel model) { return std::make_shared<TriangleDevice>(std::move(model)); }

}  // namespace noniid
