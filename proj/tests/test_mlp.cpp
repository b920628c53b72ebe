#include <algorithm>
#include <cmath>
#include <random>
#include <limits>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "skintex/error.hpp"
#include "skintex/mlp.hpp"

using namespace skintex;
using namespace skintex::mlp;

namespace {

NormalizationRanges unit_ranges() {
  NormalizationRanges r;
  for (auto& range : r.ranges) range = {-1.0, 1.0};
  return r;
}

MlpModel random_model(std::mt19937_64& rng, double scale) {
  MlpModel m;
  m.params = oracle::random_parameters(rng, scale);
  m.ranges = unit_ranges();
  return m;
}

ModelFormatError::Kind load_failure(const std::string& text) {
  try {
    load_model(text);
  } catch (const ModelFormatError& e) {
    return e.kind();
  }
  FAIL("load_model accepted the document");
  return ModelFormatError::Kind::kSchema;
}

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("init_model is seeded, bounded and deterministic") {
  const MlpModel a = init_model(42, unit_ranges());
  const MlpModel b = init_model(42, unit_ranges());
  const MlpModel c = init_model(43, unit_ranges());
  CHECK(a == b);
  CHECK(a.params != c.params);

  const double hidden_bound = 1.0 / std::sqrt(13.0);
  const double output_bound = 1.0 / std::sqrt(50.0);
  for (std::size_t h = 0; h < kHidden; ++h) {
    for (std::size_t i = 0; i < kInputs; ++i) CHECK(std::abs(a.params.hidden_weight(h, i)) <= hidden_bound);
    CHECK(std::abs(a.params.output_weight(h)) <= output_bound);
    CHECK(a.params.hidden_bias(h) == 0.0);
  }
  CHECK(a.params.output_bias() == 0.0);
}

TEST_CASE("init_model draws from the documented generator") {
  // First hidden weight: one raw mt19937_64 draw mapped to [-1/sqrt(13), 1/sqrt(13)].
  std::mt19937_64 rng(42);
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  CHECK(init_model(42, unit_ranges()).params.hidden_weight(0, 0) == (1.0 / std::sqrt(13.0)) * (2.0 * u - 1.0));

  std::set<std::vector<double>> distinct;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MlpModel m = init_model(seed, unit_ranges());
    distinct.emplace(m.params.flat().begin(), m.params.flat().end());
  }
  CHECK(distinct.size() == 20);
}

TEST_CASE("forward") {
  const MlpModel zero;
  CHECK(forward(zero, FeatureVector{{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}}) == 0.0);

  // 1-1-1 network embedded in the 13-50-1 shape.
  MlpModel reduced;
  reduced.params.hidden_weight(0, 0) = 0.5;
  reduced.params.output_weight(0) = 1.0;
  FeatureVector x{};
  x[0] = 1.0;
  CHECK(std::abs(forward(reduced, x) - 0.4318081805950961) < 1e-15);

  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const MlpModel m = random_model(rng, 0.5);
    const double y = forward(m, oracle::random_features(rng, -3.0, 3.0));
    CHECK(y > -1.0);
    CHECK(y < 1.0);
  }
}

TEST_CASE("sse") {
  const MlpModel zero;
  FeatureVector x{};
  CHECK_THROWS_AS(sse(zero, {}), ArgumentError);
  const std::vector<Sample> one{{x, 1.0}};
  CHECK(sse(zero, one) == 1.0);
  const std::vector<Sample> five{{x, 1.0}, {x, -1.0}, {x, -1.0}, {x, 1.0}, {x, 1.0}};
  CHECK(sse(zero, five) == 5.0);

  std::mt19937_64 rng(2);
  const MlpModel m = random_model(rng, 0.5);
  std::vector<Sample> exact;
  for (int k = 0; k < 4; ++k) {
    const FeatureVector v = oracle::random_features(rng, -1.0, 1.0);
    exact.push_back({v, forward(m, v)});
  }
  CHECK(sse(m, exact) == 0.0);
  CHECK(sse_gradient(m.params, exact).sse == 0.0);
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> batch_size(1, 6);
  for (int instance = 0; instance < 15; ++instance) {
    const MlpModel m = random_model(rng, 0.6);
    const auto batch = oracle::random_batch(rng, batch_size(rng));
    const Parameters analytic = gradient(m, batch);
    const Parameters numeric = oracle::central_difference(m.params, batch, 1e-4);
    CHECK(std::abs(sse(m, batch) - oracle::reference_sse(m.params, batch)) < 1e-12);
    for (std::size_t k = 0; k < Parameters::kCount; ++k) {
      const double a = analytic.flat()[k];
      const double n = numeric.flat()[k];
      const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-3});
      CHECK(rel < 1e-5);
    }
  }
}

TEST_CASE("gradient special cases") {
  std::mt19937_64 rng(4);
  const MlpModel m = random_model(rng, 0.5);
  CHECK_THROWS_AS(gradient(m, {}), ArgumentError);

  std::vector<Sample> at_target;
  for (int k = 0; k < 3; ++k) {
    const FeatureVector v = oracle::random_features(rng, -1.0, 1.0);
    at_target.push_back({v, forward(m, v)});
  }
  const Parameters zero_grad = gradient(m, at_target);
  CHECK(std::all_of(zero_grad.flat().begin(), zero_grad.flat().end(), [](double g) { return g == 0.0; }));

  const auto single = oracle::random_batch(rng, 1);
  const std::vector<Sample> twice{single[0], single[0]};
  const Parameters g1 = gradient(m, single);
  const Parameters g2 = gradient(m, twice);
  for (std::size_t k = 0; k < Parameters::kCount; ++k) CHECK(g2.flat()[k] == 2.0 * g1.flat()[k]);

  const auto batch = oracle::random_batch(rng, 5);
  auto doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  const Parameters gb = gradient(m, batch);
  const Parameters gd = gradient(m, doubled);
  for (std::size_t k = 0; k < Parameters::kCount; ++k) {
    CHECK(std::abs(gd.flat()[k] - 2.0 * gb.flat()[k]) <= 1e-12 * std::max(1.0, std::abs(gb.flat()[k])));
  }
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lr_decrease = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.lr_initial = 20.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.sse_goal = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.max_sse_growth = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);

  CHECK(TrainConfig{}.sse_goal == 1e-6);
  CHECK(TrainConfig{}.max_epochs == 50000);
}

TEST_CASE("train returns at once when the goal already holds") {
  std::mt19937_64 rng(5);
  const MlpModel m = random_model(rng, 0.5);
  std::vector<Sample> batch;
  const FeatureVector v = oracle::random_features(rng, -1.0, 1.0);
  batch.push_back({v, forward(m, v)});
  const TrainResult r = train(m, batch, TrainConfig{});
  CHECK(r.trace.reason == TerminalReason::kGoalReached);
  CHECK(r.trace.epochs.empty());
  CHECK(r.trace.accepted_steps() == 0);
  CHECK(r.model == m);
}

TEST_CASE("train solves a separable pair and honours the step rule") {
  FeatureVector a{}, b{};
  a.values.fill(0.5);
  b.values.fill(-0.5);
  const std::vector<Sample> batch{{a, 1.0}, {b, -1.0}};
  const TrainConfig cfg;
  const TrainResult r = train(init_model(1, unit_ranges()), batch, cfg);

  CHECK(r.trace.reason == TerminalReason::kGoalReached);
  CHECK(r.trace.final_sse() <= 1e-6);
  CHECK(r.trace.epochs.size() <= 50000);
  CHECK(sse(r.model, batch) == r.trace.final_sse());

  double last_accepted = r.trace.initial_sse;
  for (const EpochRecord& e : r.trace.epochs) {
    CHECK(e.lr >= cfg.lr_min);
    CHECK(e.lr <= cfg.lr_max);
    CHECK(e.sse >= 0.0);
    CHECK(e.sse <= cfg.max_sse_growth * last_accepted);
    if (e.accepted) {
      CHECK(e.candidate_sse == e.sse);
      last_accepted = e.sse;
    } else {
      CHECK(e.candidate_sse > cfg.max_sse_growth * last_accepted);
    }
  }

  const TrainResult again = train(init_model(1, unit_ranges()), batch, cfg);
  CHECK(again.model == r.model);
  CHECK(again.trace.epochs.size() == r.trace.epochs.size());
}

TEST_CASE("train stops at max_epochs and adapts the rate") {
  std::mt19937_64 rng(6);
  const auto batch = oracle::random_batch(rng, 40);
  TrainConfig cfg;
  cfg.max_epochs = 300;
  cfg.lr_initial = 1.0;  // large enough that some steps get rejected
  const TrainResult r = train(init_model(9, unit_ranges()), batch, cfg);
  CHECK(r.trace.reason == TerminalReason::kMaxEpochs);
  CHECK(r.trace.epochs.size() == 300);
  CHECK(r.trace.final_sse() < r.trace.initial_sse);
  const auto rejected = r.trace.epochs.size() - r.trace.accepted_steps();
  CHECK(rejected > 0);
  double lr = cfg.lr_initial;
  double current = r.trace.initial_sse;
  for (const EpochRecord& e : r.trace.epochs) {
    if (!e.accepted) {
      CHECK(e.lr == std::max(lr * cfg.lr_decrease, cfg.lr_min));
    } else if (e.sse < current) {
      CHECK(e.lr == std::min(lr * cfg.lr_increase, cfg.lr_max));
    } else {
      CHECK(e.lr == lr);
    }
    if (e.accepted) current = e.sse;
    lr = e.lr;
  }
}

TEST_CASE("train reports divergence with the trace") {
  FeatureVector bad{};
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  const std::vector<Sample> batch{{bad, 1.0}};
  CHECK_THROWS_AS(train(init_model(1, unit_ranges()), batch, TrainConfig{}), TrainingDivergedError);
  CHECK_THROWS_AS(train(init_model(1, unit_ranges()), {}, TrainConfig{}), ArgumentError);
  TrainConfig broken;
  broken.lr_increase = 0.5;
  const std::vector<Sample> ok{{FeatureVector{}, 1.0}};
  CHECK_THROWS_AS(train(init_model(1, unit_ranges()), ok, broken), ArgumentError);
}

TEST_CASE("classify thresholds at zero") {
  MlpModel m;
  m.ranges = unit_ranges();
  const FeatureVector x{};
  CHECK(classify(m, x).label == Label::kSkin);
  CHECK(classify(m, x).score == 0.0);
  m.params.output_bias() = std::atanh(0.8);
  CHECK(classify(m, x).label == Label::kSkin);
  CHECK(classify(m, x).score == doctest::Approx(0.8));
  m.params.output_bias() = std::atanh(-0.9);
  CHECK(classify(m, x).label == Label::kNonSkin);
  CHECK(target_for(Label::kSkin) == 1.0);
  CHECK(target_for(Label::kNonSkin) == -1.0);
}

TEST_CASE("classify applies the stored normalization") {
  MlpModel m;
  m.ranges = unit_ranges();
  m.ranges.ranges[0] = {100.0, 200.0};
  m.params.hidden_weight(0, 0) = 1.0;
  m.params.output_weight(0) = 1.0;
  FeatureVector raw{};
  raw[0] = 110.0;  // normalizes to -0.8
  CHECK(classify(m, raw).label == Label::kNonSkin);
  CHECK(classify(m, raw).score == doctest::Approx(std::tanh(std::tanh(-0.8))));
}

TEST_CASE("scaling the output layer keeps every decision") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lambda(0.01, 100.0);
  for (int k = 0; k < 50; ++k) {
    const MlpModel m = random_model(rng, 0.5);
    MlpModel scaled = m;
    const double l = lambda(rng);
    for (std::size_t h = 0; h < kHidden; ++h) scaled.params.output_weight(h) *= l;
    scaled.params.output_bias() *= l;
    for (int n = 0; n < 10; ++n) {
      const FeatureVector x = oracle::random_features(rng, -1.0, 1.0);
      CHECK(classify(m, x).label == classify(scaled, x).label);
    }
  }
}

TEST_CASE("model file round trip is bit exact") {
  std::mt19937_64 rng(8);
  MlpModel m = random_model(rng, 2.0);
  m.params.hidden_weight(3, 4) = 0.1;
  m.params.output_bias() = -1e-300;
  m.params.hidden_bias(7) = 5e-324;
  for (auto& r : m.ranges.ranges) {
    const double lo = std::uniform_real_distribution<double>(-300.0, 0.0)(rng);
    r = {lo, lo + 123.456789};
  }
  m.metadata.features = {Displacement{-2, 3}, 64};

  const std::string text = save_model(m);
  const MlpModel back = load_model(text);
  CHECK(back == m);
  CHECK(save_model(back) == text);
  for (int k = 0; k < 20; ++k) {
    const FeatureVector v = oracle::random_features(rng, -300.0, 300.0);
    CHECK(classify(back, v).score == classify(m, v).score);
  }

  // 17 significant digits, never shortest-form
  CHECK(text.find("0.10000000000000001") != std::string::npos);
}

TEST_CASE("model file errors") {
  using K = ModelFormatError::Kind;
  const std::string good = save_model(init_model(1, unit_ranges()));
  CHECK_NOTHROW(load_model(good));

  CHECK(load_failure("{ not json") == K::kSyntax);
  CHECK(load_failure(replace_once(good, "\"format_version\": 1", "\"format_version\": 2")) == K::kVersion);
  CHECK(load_failure(replace_once(good, "[13, 50, 1]", "[13, 49, 1]")) == K::kDimension);
  CHECK(load_failure(replace_once(good, "\"output_bias\": 0", "\"output_bias\": 1e999")) == K::kNonFinite);
  CHECK(load_failure(replace_once(good, "\"activation\": \"tanh\"", "\"activation\": \"relu\"")) == K::kSchema);
  CHECK(load_failure(replace_once(good, "\"levels\": 256", "\"levels\": 1")) == K::kSchema);
  CHECK(load_failure(replace_once(good, "\"feature_order\": \"entropy,", "\"feature_order\": \"energy,")) ==
        K::kSchema);

  // Drop one hidden bias: the array no longer matches the declared shape.
  const auto biases = good.find("\"hidden_biases\": [");
  REQUIRE(biases != std::string::npos);
  const auto first_comma = good.find(',', biases);
  std::string short_biases = good;
  short_biases.erase(biases + 18, first_comma - (biases + 18) + 1);
  CHECK(load_failure(short_biases) == K::kDimension);
}
