#include "skintex/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace skintex::mlp {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool all_finite(const Parameters& p) {
  return std::all_of(p.flat().begin(), p.flat().end(), [](double v) { return std::isfinite(v); });
}

void require_non_empty(std::span<const Sample> batch) {
  if (batch.empty()) throw ArgumentError("batch must contain at least one sample");
}

}  // namespace

MlpModel init_model(std::uint64_t seed, const NormalizationRanges& ranges, const ModelMetadata& metadata) {
  MlpModel m{Parameters{}, ranges, metadata};
  std::mt19937_64 rng(seed);
  const double hidden_bound = 1.0 / std::sqrt(static_cast<double>(kInputs));
  const double output_bound = 1.0 / std::sqrt(static_cast<double>(kHidden));
  for (std::size_t h = 0; h < kHidden; ++h) {
    for (std::size_t i = 0; i < kInputs; ++i) {
      m.params.hidden_weight(h, i) = hidden_bound * (2.0 * unit_uniform(rng) - 1.0);
    }
  }
  for (std::size_t h = 0; h < kHidden; ++h) {
    m.params.output_weight(h) = output_bound * (2.0 * unit_uniform(rng) - 1.0);
  }
  return m;
}

double forward(const Parameters& p, const FeatureVector& x) {
  double z = p.output_bias();
  for (std::size_t h = 0; h < kHidden; ++h) {
    double a = p.hidden_bias(h);
    for (std::size_t i = 0; i < kInputs; ++i) a += p.hidden_weight(h, i) * x[i];
    z += p.output_weight(h) * std::tanh(a);
  }
  return std::tanh(z);
}

double sse(const Parameters& p, std::span<const Sample> batch) {
  require_non_empty(batch);
  double total = 0.0;
  for (const Sample& s : batch) {
    const double e = s.target - forward(p, s.x);
    total += e * e;
  }
  return total;
}

SseGradient sse_gradient(const Parameters& p, std::span<const Sample> batch) {
  require_non_empty(batch);
  SseGradient out;
  Parameters& g = out.gradient;
  std::array<double, kHidden> hidden{};

  for (const Sample& s : batch) {
    double z = p.output_bias();
    for (std::size_t h = 0; h < kHidden; ++h) {
      double a = p.hidden_bias(h);
      for (std::size_t i = 0; i < kInputs; ++i) a += p.hidden_weight(h, i) * s.x[i];
      hidden[h] = std::tanh(a);
      z += p.output_weight(h) * hidden[h];
    }
    const double y = std::tanh(z);
    const double residual = y - s.target;
    out.sse += residual * residual;

    // d(t - y)^2 / dz = 2 (y - t) (1 - y^2)
    const double delta_out = 2.0 * residual * (1.0 - y * y);
    g.output_bias() += delta_out;
    for (std::size_t h = 0; h < kHidden; ++h) {
      g.output_weight(h) += delta_out * hidden[h];
      const double delta_hidden = delta_out * p.output_weight(h) * (1.0 - hidden[h] * hidden[h]);
      g.hidden_bias(h) += delta_hidden;
      for (std::size_t i = 0; i < kInputs; ++i) g.hidden_weight(h, i) += delta_hidden * s.x[i];
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(lr_decrease > 0.0 && lr_decrease < 1.0)) throw ArgumentError("lr_decrease must lie in (0, 1)");
  if (!(lr_increase > 1.0)) throw ArgumentError("lr_increase must exceed 1");
  if (!(max_sse_growth > 1.0)) throw ArgumentError("max_sse_growth must exceed 1");
  if (!(lr_min > 0.0 && lr_min < lr_initial && lr_initial < lr_max && std::isfinite(lr_max))) {
    throw ArgumentError("learning rates must satisfy 0 < lr_min < lr_initial < lr_max");
  }
  if (!(sse_goal > 0.0)) throw ArgumentError("sse_goal must be positive");
  if (max_epochs < 0) throw ArgumentError("max_epochs must be non-negative");
}

std::string_view to_string(TerminalReason reason) {
  return reason == TerminalReason::kGoalReached ? "goal_reached" : "max_epochs";
}

std::size_t TrainTrace::accepted_steps() const {
  return static_cast<std::size_t>(
      std::count_if(epochs.begin(), epochs.end(), [](const EpochRecord& r) { return r.accepted; }));
}

TrainResult train(MlpModel model, std::span<const Sample> batch, const TrainConfig& cfg) {
  require_non_empty(batch);
  cfg.validate();

  TrainTrace trace;
  SseGradient current = sse_gradient(model.params, batch);
  trace.initial_sse = current.sse;
  if (!std::isfinite(current.sse) || !all_finite(current.gradient)) {
    throw TrainingDivergedError("non-finite SSE at the initial parameters", std::move(trace));
  }
  if (current.sse <= cfg.sse_goal) {
    trace.reason = TerminalReason::kGoalReached;
    return {std::move(model), std::move(trace)};
  }

  trace.epochs.reserve(static_cast<std::size_t>(cfg.max_epochs));
  double lr = cfg.lr_initial;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Parameters candidate = model.params;
    auto theta = candidate.flat();
    const auto grad = current.gradient.flat();
    for (std::size_t k = 0; k < Parameters::kCount; ++k) theta[k] -= lr * grad[k];

    SseGradient next = sse_gradient(candidate, batch);
    if (!std::isfinite(next.sse) || !all_finite(next.gradient) || !all_finite(candidate)) {
      throw TrainingDivergedError("non-finite SSE or gradient at epoch " + std::to_string(epoch),
                                  std::move(trace));
    }

    EpochRecord rec{epoch, current.sse, lr, false, next.sse};
    if (next.sse > cfg.max_sse_growth * current.sse) {
      lr = std::max(lr * cfg.lr_decrease, cfg.lr_min);
    } else {
      if (next.sse < current.sse) lr = std::min(lr * cfg.lr_increase, cfg.lr_max);
      model.params = candidate;
      current = std::move(next);
      rec.accepted = true;
      rec.sse = current.sse;
    }
    rec.lr = lr;
    trace.epochs.push_back(rec);

    if (current.sse <= cfg.sse_goal) {
      trace.reason = TerminalReason::kGoalReached;
      return {std::move(model), std::move(trace)};
    }
  }
  trace.reason = TerminalReason::kMaxEpochs;
  return {std::move(model), std::move(trace)};
}

std::string_view to_string(Label label) { return label == Label::kSkin ? "skin" : "non-skin"; }

Classification classify(const MlpModel& m, const FeatureVector& raw_features) {
  const double score = forward(m.params, normalize(raw_features, m.ranges));
  return {score >= 0.0 ? Label::kSkin : Label::kNonSkin, score};
}

}  // namespace skintex::mlp
