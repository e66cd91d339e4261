#include "noniid/hypothesis.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <thread>

namespace noniid {

Interval wilson_interval(long successes, long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  // Clamp so that lo <= p <= hi survives rounding at p in {0, 1}.
  return {std::clamp(std::min(centre - half, p), 0.0, 1.0), std::clamp(std::max(centre + half, p), 0.0, 1.0)};
}

Transcript simulate_transcript(const HypothesisTest& test, const DeviceModel& device, int n, Rng& rng) {
  const Alphabet alphabet = test.alphabet;
  if (!(device.alphabet() == alphabet))
    throw AlphabetMismatch("device " + to_string(device.alphabet()) + " vs test " + to_string(alphabet));
  Transcript s;
  s.reserve(static_cast<std::size_t>(n));
  bool stopped = false;
  for (int k = 0; k < n; ++k) {
    if (test.stop_rule && (stopped || test.stop_rule(s))) {
      stopped = true;
      s.push_back({kNullSymbol, kNullSymbol});
      continue;
    }
    int x = 0;
    if (alphabet.input_size > 1) {
      const Vec<double> q = test.input_policy(k, s);
      x = sample_categorical({q.data(), static_cast<std::size_t>(q.size())}, rng);
    }
    s.push_back({x, device.respond(x, s, rng)});
  }
  return s;
}

namespace {

bool decide(const HypothesisTest& test, History s, Rng& rng) {
  const double q = test.decision(s);
  if (q >= 1.0) return true;
  if (q <= 0.0) return false;
  return uniform01(rng) < q;
}

}  // namespace

namespace {

template <typename DeviceFor>
TestReport run_monte_carlo(const HypothesisTest& test, DeviceFor device_for, std::string device_name, int n,
                           long trials, std::uint64_t seed, const MonteCarloOptions& options) {
  if (trials < 1) throw Error("monte_carlo_acceptance: trials must be >= 1");
  if (n != test.max_rounds) throw Error("monte_carlo_acceptance: n differs from the test length");
  const auto start = std::chrono::steady_clock::now();

  std::vector<char> accepted(static_cast<std::size_t>(trials), 0);
  const long traced = options.trace ? std::min(options.trace_trials, trials) : 0;
  std::vector<std::vector<TraceRow>> traces(static_cast<std::size_t>(traced));
  std::optional<FrequencyTable> first;

  auto run_range = [&](long begin, long end) {
    for (long t = begin; t < end; ++t) {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
      const Transcript s = device_for(rng, [&](const DeviceModel& device) {
        return simulate_transcript(test, device, n, rng);
      });
      accepted[static_cast<std::size_t>(t)] = decide(test, s, rng);
      if (t == 0) first = frequency_estimate(s, test.alphabet);
      if (t < traced) {
        auto& rows = traces[static_cast<std::size_t>(t)];
        rows.reserve(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
          TraceStep step{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
          if (test.tracer) step = test.tracer(History(s).first(k + 1));
          rows.push_back({t, static_cast<int>(k + 1), s[k].x, s[k].a, step.statistic, step.p_value});
        }
      }
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(trials)));
  if (threads == 1) {
    run_range(0, trials);
  } else {
    std::vector<std::jthread> pool;
    const long chunk = (trials + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const long begin = w * chunk;
      const long end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
  }

  TestReport report;
  report.test = test.descriptor;
  report.device = std::move(device_name);
  report.n = n;
  report.trials = trials;
  report.accepted = std::count(accepted.begin(), accepted.end(), 1);
  report.accept_rate = static_cast<double>(report.accepted) / static_cast<double>(trials);
  report.ci95 = wilson_interval(report.accepted, trials);
  report.seed = seed;
  report.first_trial_frequencies = std::move(first);
  if (options.trace)
    for (auto& rows : traces) options.trace->insert(options.trace->end(), rows.begin(), rows.end());
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace

TestReport monte_carlo_acceptance(const HypothesisTest& test, const DeviceModel& device, int n, long trials,
                                  std::uint64_t seed, const MonteCarloOptions& options) {
  return run_monte_carlo(
      test, [&device](Rng&, auto&& play) { return play(device); }, device.descriptor(), n, trials, seed, options);
}

TestReport monte_carlo_acceptance(const HypothesisTest& test, const DeviceFactory& factory, int n, long trials,
                                  std::uint64_t seed, const MonteCarloOptions& options,
                                  std::string device_descriptor) {
  return run_monte_carlo(
      test,
      [&factory](Rng& rng, auto&& play) {
        const DevicePtr device = factory(rng);
        return play(*device);
      },
      std::move(device_descriptor), n, trials, seed, options);
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t hash_counts(const Eigen::MatrixXi& counts) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(counts.size()));
  for (Eigen::Index i = 0; i < counts.size(); ++i) h = mix64(h ^ static_cast<std::uint64_t>(counts.data()[i]));
  return h;
}

}  // namespace

double bootstrap_sigma(const BehaviorFunctional& functional, const FrequencyTable& table, int resamples,
                       std::uint64_t seed) {
  if (resamples < 2) return 0.0;
  const long total = table.total();
  if (total == 0) return 0.0;
  Rng rng(derive_seed(seed, hash_counts(table.counts)));
  const Eigen::Index cells = table.counts.size();
  Eigen::MatrixXi draw(table.counts.rows(), table.counts.cols());
  double mean = 0.0;
  double m2 = 0.0;
  for (int b = 0; b < resamples; ++b) {
    long remaining = total;
    long mass_left = total;
    for (Eigen::Index i = 0; i < cells; ++i) {
      const long c = table.counts.data()[i];
      int k = 0;
      if (remaining > 0 && c > 0) {
        if (c >= mass_left) {
          k = static_cast<int>(remaining);
        } else {
          std::binomial_distribution<long> binom(remaining, static_cast<double>(c) / static_cast<double>(mass_left));
          k = static_cast<int>(binom(rng));
        }
      }
      draw.data()[i] = k;
      remaining -= k;
      mass_left -= c;
    }
    FrequencyTable resampled = frequency_estimate(draw, table.alphabet);
    if (!resampled.undefined_inputs.empty()) {
      Mat<double> est = resampled.estimate.probs();
      for (int x : resampled.undefined_inputs) est.col(x) = table.estimate.probs().col(x);
      resampled.estimate = Behavior(table.alphabet, std::move(est));
    }
    const double v = functional(resampled.estimate);
    // Welford update.
    const double delta = v - mean;
    mean += delta / (b + 1);
    m2 += delta * (v - mean);
  }
  return std::sqrt(m2 / (resamples - 1));
}

HypothesisTest ksigma_frequency_test(BehaviorFunctional functional, double alpha, double k_sigma,
                                     Vec<double> input_dist, int n, Alphabet alphabet, KSigmaOptions options) {
  if (!(k_sigma > 0.0)) throw Error("ksigma test needs K > 0");
  if (input_dist.size() != alphabet.input_size) throw AlphabetMismatch("ksigma input distribution");
  if (options.required_inputs.empty()) {
    for (int x = 0; x < alphabet.input_size; ++x)
      if (input_dist[x] > 0.0) options.required_inputs.push_back(x);
  }
  HypothesisTest test;
  test.alphabet = alphabet;
  test.max_rounds = n;
  test.input_policy = fixed_input_policy(std::move(input_dist));
  test.descriptor = "ksigma";
  test.decision = [=](History s) -> double {
    const FrequencyTable table = frequency_estimate(s, alphabet);
    for (int x : options.required_inputs)
      if (!table.defined(x)) throw UndefinedFrequency(x);
    const double value = functional(table.estimate);
    const double sigma = bootstrap_sigma(functional, table, options.bootstrap_resamples, options.bootstrap_seed);
    return value > alpha + k_sigma * sigma ? 1.0 : 0.0;
  };
  test.tracer = [=](History s) -> TraceStep {
    const FrequencyTable table = frequency_estimate(s, alphabet);
    for (int x : options.required_inputs)
      if (!table.defined(x)) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    return {functional(table.estimate), std::numeric_limits<double>::quiet_NaN()};
  };
  return test;
}

// ---------------------------------------------------------------------------

double martingale_threshold(int n, double score_width, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("epsilon must lie in (0, 1)");
  return score_width * std::sqrt(n * std::log(1.0 / epsilon) / 2.0);
}

double martingale_p_value(double statistic, int n, double score_width) {
  if (n <= 0 || statistic <= 0.0) return 1.0;
  if (score_width <= 0.0) return 0.0;
  return std::min(1.0, std::exp(-2.0 * statistic * statistic / (n * score_width * score_width)));
}

Mat<double> martingale_scores(const LinearWitness& witness, const Vec<double>& input_dist) {
  const auto rows = witness.coeffs.rows();
  const auto cols = witness.coeffs.cols();
  if (input_dist.size() != cols || witness.input_weights.size() != cols)
    throw AlphabetMismatch("martingale input distribution");
  if (witness.score_min > witness.score_max) throw UnboundedScore("empty score range");
  constexpr double slack = 1e-12;
  Mat<double> scores = Mat<double>::Zero(rows, cols);
  for (Eigen::Index x = 0; x < cols; ++x) {
    if (input_dist[x] <= 0.0) {
      if (witness.input_weights[x] != 0.0)
        throw UnboundedScore("input " + std::to_string(x) + " has weight but is never sampled");
      continue;
    }
    for (Eigen::Index a = 0; a < rows; ++a) {
      const double raw = witness.coeffs(a, x) * witness.input_weights[x] / input_dist[x];
      if (raw < witness.score_min - slack || raw > witness.score_max + slack)
        throw UnboundedScore("score " + std::to_string(raw) + " at (a=" + std::to_string(a) +
                             ", x=" + std::to_string(x) + ") outside the declared range");
      scores(a, x) = raw - witness.alpha;
    }
  }
  return scores;
}

double martingale_statistic(const Mat<double>& centered_scores, History transcript) {
  double s = 0.0;
  for (const Round& r : transcript)
    if (r.x != kNullSymbol) s += centered_scores(r.a, r.x);
  return s;
}

HypothesisTest martingale_witness_test(const LinearWitness& witness, double epsilon, Vec<double> input_dist, int n) {
  const Mat<double> scores = martingale_scores(witness, input_dist);
  const double width = witness.score_max - witness.score_min;
  const double threshold = martingale_threshold(n, width, epsilon);
  HypothesisTest test;
  test.alphabet = witness.alphabet();
  test.max_rounds = n;
  test.input_policy = fixed_input_policy(std::move(input_dist));
  test.descriptor = "martingale";
  test.decision = [scores, threshold](History s) -> double {
    return martingale_statistic(scores, s) >= threshold ? 1.0 : 0.0;
  };
  test.tracer = [scores, width](History s) -> TraceStep {
    const double stat = martingale_statistic(scores, s);
    return {stat, martingale_p_value(stat, static_cast<int>(s.size()), width)};
  };
  return test;
}

// ---------------------------------------------------------------------------

DeterministicStrategy strategy_from_index(long index, int rounds, const std::vector<int>& party_outputs) {
  DeterministicStrategy s;
  s.party_outputs = party_outputs;
  s.outputs.assign(party_outputs.size(), std::vector<int>(static_cast<std::size_t>(rounds)));
  for (std::size_t i = party_outputs.size(); i-- > 0;) {
    for (int k = rounds; k-- > 0;) {
      s.outputs[i][static_cast<std::size_t>(k)] = static_cast<int>(index % party_outputs[i]);
      index /= party_outputs[i];
    }
  }
  return s;
}

std::vector<FamilyPoint> verify_test_family(const std::vector<HypothesisTest>& tests,
                                            const std::vector<DevicePtr>& null_devices, const DeviceModel& target,
                                            long trials, std::uint64_t seed, const MonteCarloOptions& options) {
  std::vector<FamilyPoint> out;
  const std::uint64_t stride = null_devices.size() + 1;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const auto& test = tests[i];
    FamilyPoint point;
    point.n = test.max_rounds;
    for (std::size_t j = 0; j < null_devices.size(); ++j) {
      auto report = monte_carlo_acceptance(test, *null_devices[j], test.max_rounds, trials,
                                           derive_seed(seed, i * stride + j), options);
      if (j == 0 || report.accept_rate > point.epsilon_hat) {
        point.epsilon_hat = report.accept_rate;
        point.worst_null = report.device;
      }
      point.null_reports.push_back(std::move(report));
    }
    point.target_report = monte_carlo_acceptance(test, target, test.max_rounds, trials,
                                                 derive_seed(seed, i * stride + null_devices.size()), options);
    point.detection = point.target_report.accept_rate;
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace noniid
