#include "noniid/triangle.hpp"

#include <cmath>
#include <limits>

#include "noniid/lp.hpp"

namespace noniid {

Alphabet triangle_alphabet() { return {1, 8}; }

Behavior triangle_point(int bit) { return Behavior::point_mass(triangle_alphabet(), bit ? 7 : 0); }

Behavior p_c() {
  Mat<double> t = Mat<double>::Zero(8, 1);
  t(0, 0) = 0.5;
  t(7, 0) = 0.5;
  return {triangle_alphabet(), std::move(t)};
}

Vec<double> party_marginal(const Behavior& p, int party, std::array<int, 3> outputs) {
  Vec<double> m = Vec<double>::Zero(outputs[static_cast<std::size_t>(party)]);
  for (int a = 0; a < p.alphabet().output_size; ++a) {
    const auto digits = unpack_symbols(a, outputs);
    m[digits[static_cast<std::size_t>(party)]] += p(a, 0);
  }
  return m;
}

LinearWitness agreement_witness(double alpha) {
  Mat<double> f = Mat<double>::Zero(8, 1);
  f(0, 0) = 1.0;
  f(7, 0) = 1.0;
  return LinearWitness::make(std::move(f), alpha);
}

namespace {

double entropy_bits(const double* probs, int size) {
  double h = 0.0;
  for (int i = 0; i < size; ++i)
    if (probs[i] > 0.0) h -= probs[i] * std::log2(probs[i]);
  return h;
}

}  // namespace

double triangle_entropy_witness(const Behavior& p) {
  if (!(p.alphabet() == triangle_alphabet())) throw AlphabetMismatch("entropy witness expects three binary parties");
  double m1[2] = {0, 0}, m2[2] = {0, 0}, m3[2] = {0, 0};
  double m12[4] = {0, 0, 0, 0}, m13[4] = {0, 0, 0, 0};
  for (int a = 0; a < 8; ++a) {
    const double v = p(a, 0);
    const int a1 = a >> 2, a2 = (a >> 1) & 1, a3 = a & 1;
    m1[a1] += v;
    m2[a2] += v;
    m3[a3] += v;
    m12[a1 * 2 + a2] += v;
    m13[a1 * 2 + a3] += v;
  }
  return entropy_bits(m1, 2) + entropy_bits(m2, 2) + entropy_bits(m3, 2) - entropy_bits(m12, 4) -
         entropy_bits(m13, 4);
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kBlocks = 6;  // p1, p2, p3, q1, q2, q3

struct BlockLayout {
  int size = 0;                 // number of parameters
  int group = 0;                // simplex size (each group sums to 1)
};

BlockLayout layout(const TriangleLocalModel& m, int block) {
  if (block < 3) return {m.supports[block], m.supports[block]};
  const int party = block - 3;
  const auto rows = static_cast<int>(m.responses[party].rows());
  return {rows * m.outputs[party], m.outputs[party]};
}

/// Linear map L with P = L * theta_block, every other block held fixed.
/// Parameters of a response block are laid out row-major (row, output).
Mat<double> linearize(const TriangleLocalModel& m, int block) {
  const BlockLayout lay = layout(m, block);
  const int outputs = m.outputs[0] * m.outputs[1] * m.outputs[2];
  Mat<double> L = Mat<double>::Zero(outputs, lay.size);
  std::array<int, 3> lambda{};
  for (lambda[0] = 0; lambda[0] < m.supports[0]; ++lambda[0])
    for (lambda[1] = 0; lambda[1] < m.supports[1]; ++lambda[1])
      for (lambda[2] = 0; lambda[2] < m.supports[2]; ++lambda[2]) {
        double src = 1.0;
        for (int i = 0; i < 3; ++i)
          if (block != i) src *= m.sources[i][lambda[i]];
        if (src == 0.0) continue;
        const std::array<int, 3> rows{m.response_row(0, lambda), m.response_row(1, lambda),
                                      m.response_row(2, lambda)};
        for (int a1 = 0; a1 < m.outputs[0]; ++a1)
          for (int a2 = 0; a2 < m.outputs[1]; ++a2)
            for (int a3 = 0; a3 < m.outputs[2]; ++a3) {
              const std::array<int, 3> a{a1, a2, a3};
              double v = src;
              for (int i = 0; i < 3; ++i)
                if (block != 3 + i) v *= m.responses[i](rows[i], a[i]);
              if (v == 0.0) continue;
              const int out = (a1 * m.outputs[1] + a2) * m.outputs[2] + a3;
              int col;
              if (block < 3) {
                col = lambda[block];
              } else {
                const int party = block - 3;
                col = rows[party] * m.outputs[party] + a[party];
              }
              L(out, col) += v;
            }
      }
  return L;
}

void assign_block(TriangleLocalModel& m, int block, const Vec<double>& theta) {
  if (block < 3) {
    m.sources[block] = theta;
    return;
  }
  const int party = block - 3;
  auto& q = m.responses[party];
  for (Eigen::Index r = 0; r < q.rows(); ++r)
    for (Eigen::Index c = 0; c < q.cols(); ++c) q(r, c) = theta[r * q.cols() + c];
}

Vec<double> clean_simplex_groups(Vec<double> theta, int group) {
  for (Eigen::Index g = 0; g < theta.size(); g += group) {
    auto seg = theta.segment(g, group);
    seg = seg.cwiseMax(0.0);
    const double s = seg.sum();
    if (s > 0) seg /= s;
    else seg.setConstant(1.0 / group);
  }
  return theta;
}

/// Exact l1 fit of one block: min sum_a |L theta - T|_a over product simplices.
std::optional<Vec<double>> fit_block_l1(const Mat<double>& L, const Vec<double>& target, int group) {
  const auto outs = L.rows();
  const auto nv = L.cols();
  const auto groups = nv / group;
  lp::Problem<double> prob;
  prob.A = Mat<double>::Zero(2 * outs + groups, nv + outs);
  prob.b = Vec<double>::Zero(2 * outs + groups);
  prob.c = Vec<double>::Zero(nv + outs);
  prob.c.tail(outs).setConstant(-1.0);
  for (Eigen::Index a = 0; a < outs; ++a) {
    prob.A.row(a).head(nv) = L.row(a);
    prob.A(a, nv + a) = -1.0;
    prob.b[a] = target[a];
    prob.senses.push_back(lp::Sense::LessEqual);
  }
  for (Eigen::Index a = 0; a < outs; ++a) {
    prob.A.row(outs + a).head(nv) = L.row(a);
    prob.A(outs + a, nv + a) = 1.0;
    prob.b[outs + a] = target[a];
    prob.senses.push_back(lp::Sense::GreaterEqual);
  }
  for (Eigen::Index g = 0; g < groups; ++g) {
    prob.A.row(2 * outs + g).segment(g * group, group).setOnes();
    prob.b[2 * outs + g] = 1.0;
    prob.senses.push_back(lp::Sense::Equal);
  }
  const auto sol = lp::solve(prob);
  if (sol.status != lp::Status::Optimal) return std::nullopt;
  return clean_simplex_groups(sol.x.head(nv), group);
}

Vec<double> best_vertex_block(const Mat<double>& L, const Vec<double>& gain, int group) {
  const Vec<double> score = L.transpose() * gain;
  Vec<double> theta = Vec<double>::Zero(score.size());
  for (Eigen::Index g = 0; g < score.size(); g += group) {
    Eigen::Index best;
    score.segment(g, group).maxCoeff(&best);
    theta[g + best] = 1.0;
  }
  return theta;
}

// Larger is better for both objectives internally.
double score_of(const Behavior& dist, const Behavior& target, const ApproxObjective& objective) {
  if (const auto* w = std::get_if<WitnessObjective>(&objective)) return evaluate_witness(w->witness, dist);
  return -l1_distance(dist, target);
}

}  // namespace

ApproxResult best_local_approx(const Behavior& target, const ApproxObjective& objective, const ApproxOptions& options) {
  if (!(target.alphabet() == triangle_alphabet())) throw AlphabetMismatch("best_local_approx expects a triangle target");
  for (int s : options.supports)
    if (s < 1 || s > 8) throw Error("best_local_approx: supports must lie in [1, 8]");
  if (options.restarts < 1) throw Error("best_local_approx: need at least one restart");
  const Vec<double> t = target.probs().col(0);

  Vec<double> gain;
  if (const auto* w = std::get_if<WitnessObjective>(&objective))
    gain = w->witness.coeffs.col(0) * w->witness.input_weights[0];

  ApproxResult best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = make_rng(options.seed, static_cast<std::uint64_t>(r));
    TriangleLocalModel model = TriangleLocalModel::random(options.supports, rng);
    double current = score_of(triangle_exact_distribution(model), target, objective);
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      const double before = current;
      for (int block = 0; block < kBlocks; ++block) {
        const BlockLayout lay = layout(model, block);
        const Mat<double> L = linearize(model, block);
        std::optional<Vec<double>> theta;
        if (gain.size() > 0) {
          theta = best_vertex_block(L, gain, lay.group);
        } else {
          theta = fit_block_l1(L, t, lay.group);
        }
        if (!theta) continue;
        TriangleLocalModel trial = model;
        assign_block(trial, block, *theta);
        const double value = score_of(triangle_exact_distribution(trial), target, objective);
        // Accept only non-worsening moves so the trajectory is monotone.
        if (value >= current) {
          model = std::move(trial);
          current = value;
        }
      }
      if (current - before < options.tolerance) break;
    }
    best.restart_values.push_back(gain.size() > 0 ? current : -current);
    if (current > best_score) {
      best_score = current;
      best.model = model;
      best.best_restart = r;
    }
  }
  best.distribution = triangle_exact_distribution(best.model);
  best.value = gain.size() > 0 ? best_score : -best_score;
  return best;
}

// ---------------------------------------------------------------------------

DeterministicStrategy meta_strategy(const HypothesisTest& test, int n, const std::vector<int>& party_outputs) {
  // enumerate_deterministic_max lists maximizers in lexicographic key order.
  auto result = enumerate_deterministic_max(test, n, party_outputs);
  return std::move(result.argmax.front());
}

HypothesisTest pc_ksigma_test(int n, double k_sigma, std::uint64_t bootstrap_seed) {
  KSigmaOptions opts;
  opts.bootstrap_seed = bootstrap_seed;
  auto test = ksigma_frequency_test(triangle_entropy_witness, 0.0, k_sigma, Vec<double>::Ones(1), n,
                                    triangle_alphabet(), opts);
  test.descriptor = "ksigma_entropy_pc";
  return test;
}

DemoReport attack_demo(const HypothesisTest& test, const DemoOptions& options) {
  DemoReport report;
  report.test = test.descriptor;
  report.n = options.n;
  report.trials = options.trials;
  report.seed = options.seed;

  MonteCarloOptions mc;
  mc.threads = options.threads;
  std::uint64_t stream = 0;
  auto run = [&](const std::string& name, const DeviceModel& device) {
    DemoEntry e;
    e.device = name;
    e.report = monte_carlo_acceptance(test, device, options.n, options.trials, derive_seed(options.seed, stream++), mc);
    report.entries.push_back(std::move(e));
  };

  run("iid_pc", *iid_device(p_c()));
  run("clock", *clock_device({0, 0, 0}));
  run("clock_desync", *clock_device({1, 0, 0}));

  {
    // A fresh shared sequence per trial, drawn from the trial's own stream.
    DemoEntry e;
    e.device = "shared_sequence";
    const int n = options.n;
    e.report = monte_carlo_acceptance(
        test,
        [n](Rng& rng) {
          std::vector<int> q(static_cast<std::size_t>(n));
          for (auto& bit : q) bit = static_cast<int>(rng() >> 63);
          return shared_sequence_device(std::move(q));
        },
        options.n, options.trials, derive_seed(options.seed, stream++), mc, "shared_sequence_uniform");
    report.entries.push_back(std::move(e));
  }

  {
    DemoEntry e;
    e.device = "meta_strategy";
    ++stream;
    if (std::pow(8.0, options.n) <= kMaxExactStates) {
      const DeterministicStrategy s = meta_strategy(test, options.n);
      e.report = monte_carlo_acceptance(test, *strategy_device(s), options.n, options.trials,
                                        derive_seed(options.seed, stream - 1), mc);
      e.note = to_string(s);
    } else {
      e.note = "skipped: 8^n deterministic strategies exceed the 1e7 enumeration budget";
    }
    report.entries.push_back(std::move(e));
  }

  const ApproxResult approx = best_local_approx(p_c(), DistanceObjective{}, options.approx);
  report.best_local_distance = approx.value;
  run("best_local_iid", *triangle_device(approx.model));
  report.entries.back().note = "heuristic best local approximation, l1 distance " + std::to_string(approx.value);
  return report;
}

}  // namespace noniid
