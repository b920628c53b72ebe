#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skintex/error.hpp"
#include "skintex/features.hpp"

namespace skintex::mlp {

inline constexpr std::size_t kInputs = kFeatureCount;
inline constexpr std::size_t kHidden = 50;

/// Every weight and bias of the 13-50-1 network in one flat block:
/// hidden weights (row-major, one row of kInputs per hidden unit), hidden
/// biases, output weights, output bias.
class Parameters {
 public:
  static constexpr std::size_t kHiddenWeightsOffset = 0;
  static constexpr std::size_t kHiddenBiasesOffset = kHidden * kInputs;
  static constexpr std::size_t kOutputWeightsOffset = kHiddenBiasesOffset + kHidden;
  static constexpr std::size_t kOutputBiasOffset = kOutputWeightsOffset + kHidden;
  static constexpr std::size_t kCount = kOutputBiasOffset + 1;

  double& hidden_weight(std::size_t unit, std::size_t input) { return values_[unit * kInputs + input]; }
  double hidden_weight(std::size_t unit, std::size_t input) const { return values_[unit * kInputs + input]; }
  double& hidden_bias(std::size_t unit) { return values_[kHiddenBiasesOffset + unit]; }
  double hidden_bias(std::size_t unit) const { return values_[kHiddenBiasesOffset + unit]; }
  double& output_weight(std::size_t unit) { return values_[kOutputWeightsOffset + unit]; }
  double output_weight(std::size_t unit) const { return values_[kOutputWeightsOffset + unit]; }
  double& output_bias() { return values_[kOutputBiasOffset]; }
  double output_bias() const { return values_[kOutputBiasOffset]; }

  std::span<double, kCount> flat() { return values_; }
  std::span<const double, kCount> flat() const { return values_; }

  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  std::array<double, kCount> values_{};
};

/// Extraction settings the model was trained under; classification must
/// reuse them.
struct ModelMetadata {
  FeatureConfig features{};
  std::string feature_order = feature_order_tag();

  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

struct MlpModel {
  Parameters params;
  NormalizationRanges ranges;
  ModelMetadata metadata;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
///
/// The generator is std::mt19937_64 seeded with `seed`; each weight takes one
/// 64-bit draw x and maps u = (x >> 11) * 2^-53 to bound * (2u - 1). Draw
/// order: hidden weights row-major, then output weights. Both steps are fully
/// specified, so models are identical across platforms and standard libraries.
MlpModel init_model(std::uint64_t seed, const NormalizationRanges& ranges, const ModelMetadata& metadata = {});

/// One training or evaluation pair; `x` is already normalized.
struct Sample {
  FeatureVector x;
  double target = 0.0;
};

/// tanh(w2 . tanh(W1 x + b1) + b2).
double forward(const Parameters& p, const FeatureVector& x);
inline double forward(const MlpModel& m, const FeatureVector& x) { return forward(m.params, x); }

/// Sum over the batch of (target - output)^2. Throws ArgumentError when empty.
double sse(const Parameters& p, std::span<const Sample> batch);
inline double sse(const MlpModel& m, std::span<const Sample> batch) { return sse(m.params, batch); }

struct SseGradient {
  double sse = 0.0;
  Parameters gradient;
};

/// SSE and its exact gradient in one backpropagation sweep. Samples are
/// accumulated in batch order. Throws ArgumentError when empty.
SseGradient sse_gradient(const Parameters& p, std::span<const Sample> batch);
inline Parameters gradient(const MlpModel& m, std::span<const Sample> batch) {
  return sse_gradient(m.params, batch).gradient;
}

struct TrainConfig {
  double sse_goal = 1e-6;
  int max_epochs = 50000;
  double lr_initial = 0.01;
  double lr_increase = 1.05;
  double lr_decrease = 0.7;
  double max_sse_growth = 1.04;
  double lr_min = 1e-9;
  double lr_max = 10.0;
  std::uint64_t seed = 1;

  /// Throws ArgumentError unless lr_decrease < 1 < lr_increase,
  /// max_sse_growth > 1, lr_min < lr_initial < lr_max, sse_goal > 0 and
  /// max_epochs >= 0.
  void validate() const;
};

enum class TerminalReason { kGoalReached, kMaxEpochs };

std::string_view to_string(TerminalReason reason);

struct EpochRecord {
  int epoch = 0;
  /// SSE of the parameters held after this epoch's accept/reject decision.
  double sse = 0.0;
  /// Learning rate after this epoch's update.
  double lr = 0.0;
  bool accepted = false;
  /// SSE of the tentative step, whether or not it was accepted.
  double candidate_sse = 0.0;
};

struct TrainTrace {
  double initial_sse = 0.0;
  std::vector<EpochRecord> epochs;
  TerminalReason reason = TerminalReason::kMaxEpochs;

  double final_sse() const { return epochs.empty() ? initial_sse : epochs.back().sse; }
  std::size_t accepted_steps() const;
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, TrainTrace trace)
      : Error("training diverged: " + what), trace_(std::move(trace)) {}

  const TrainTrace& trace() const noexcept { return trace_; }

 private:
  TrainTrace trace_;
};

struct TrainResult {
  MlpModel model;
  TrainTrace trace;
};

/// Full-batch gradient descent on SSE with an adaptive learning rate. A step
/// whose SSE exceeds max_sse_growth times the current SSE is rejected and the
/// rate shrinks; an accepted step that lowers SSE grows the rate. Stops once
/// SSE <= sse_goal or after max_epochs epochs.
///
/// Throws ArgumentError on an empty batch or invalid config, and
/// TrainingDivergedError if SSE or the gradient becomes non-finite.
TrainResult train(MlpModel model, std::span<const Sample> batch, const TrainConfig& cfg);

enum class Label { kSkin, kNonSkin };

std::string_view to_string(Label label);

/// Training target for a label: skin +1, non-skin -1.
inline double target_for(Label label) { return label == Label::kSkin ? 1.0 : -1.0; }

struct Classification {
  Label label = Label::kSkin;
  double score = 0.0;
};

/// Normalizes with the model's ranges, runs the network; score >= 0 is skin.
Classification classify(const MlpModel& m, const FeatureVector& raw_features);

inline constexpr int kFormatVersion = 1;

/// JSON document; every real is written with 17 significant digits so load
/// restores it bit-for-bit.
std::string save_model(const MlpModel& m);

/// Throws ModelFormatError (kind distinguishes syntax, version, dimension,
/// non-finite and schema problems).
MlpModel load_model(std::string_view text);

}  // namespace skintex::mlp
