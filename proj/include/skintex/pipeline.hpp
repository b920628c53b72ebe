#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "skintex/features.hpp"
#include "skintex/image.hpp"
#include "skintex/mlp.hpp"

namespace skintex::pipeline {

using mlp::Label;

struct LabeledSample {
  std::filesystem::path path;
  Label label = Label::kSkin;
  FeatureVector features;
};

/// Subdirectory names of a dataset root.
inline constexpr const char* kSkinDir = "skin";
inline constexpr const char* kNonSkinDir = "nonskin";

/// The patch size of the reference library; other sizes are accepted with a
/// warning.
inline constexpr int kExpectedPatchSize = 80;

struct IngestResult {
  std::vector<LabeledSample> samples;
  /// Per-file warnings and skipped-file reports, in path order.
  std::vector<std::string> diagnostics;
};

/// Reads `<root>/skin/*.ppm` and `<root>/nonskin/*.ppm` in lexicographic path
/// order, skin first. Undecodable files are skipped and reported. Throws
/// DatasetError when a subdirectory is missing or yields no usable image.
IngestResult ingest(const std::filesystem::path& root, const FeatureConfig& cfg = {});

/// Fits normalization ranges on `samples`, maps skin to +1 and non-skin to -1
/// and trains a freshly initialized network (seeded from cfg.seed). Throws
/// ArgumentError unless both labels are present.
mlp::TrainResult train_pipeline(std::span<const LabeledSample> samples, const mlp::TrainConfig& cfg,
                                const FeatureConfig& features = {});

/// Confusion counts with skin as the positive class.
struct EvalReport {
  std::size_t true_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  double accuracy = 0.0;
  std::vector<std::string> misclassified;

  std::size_t total() const { return true_positive + true_negative + false_positive + false_negative; }
};

/// Throws ArgumentError on an empty set.
EvalReport evaluate(const mlp::MlpModel& m, std::span<const LabeledSample> samples);

std::string render_text(const EvalReport& r);
std::string render_json(const EvalReport& r);

/// CSV with a header row: path,label,<13 feature names>. Reals use 17
/// significant digits.
void write_feature_dump(std::ostream& out, std::span<const LabeledSample> samples);

struct SynthConfig {
  std::uint64_t seed = 7;
  int per_class = 50;
  int size = kExpectedPatchSize;
};

/// Mean color of the skin-like and the bluish class before jitter and noise.
inline constexpr Rgb kSkinBase{205, 150, 125};
inline constexpr Rgb kNonSkinBase{125, 150, 205};
inline constexpr int kBaseJitter = 10;
inline constexpr double kNoiseSigma = 12.0;

/// Generates the corpus in memory: per_class skin images followed by
/// per_class non-skin images. Each image shifts its class base color by a
/// uniform integer in [-10, 10] per channel, then adds independent Gaussian
/// noise (sigma 12) to every channel of every pixel, rounded and clamped.
/// All randomness comes from one std::mt19937_64 seeded with cfg.seed.
/// Throws ArgumentError unless per_class >= 1 and size >= 8.
std::vector<std::pair<Label, RgbImage>> synth_images(const SynthConfig& cfg);

/// Writes synth_images() as P6 files `<out>/skin/skin_NNNN.ppm` and
/// `<out>/nonskin/nonskin_NNNN.ppm`, creating directories as needed. Returns
/// the written paths.
std::vector<std::filesystem::path> synth_corpus(const SynthConfig& cfg, const std::filesystem::path& out);

}  // namespace skintex::pipeline
