#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "skintex/image.hpp"

namespace skintex {

struct ColorMoments {
  double mean = 0.0;
  double std_dev = 0.0;
  /// Signed cube root of the third central moment.
  double skewness = 0.0;
};

/// Mean, standard deviation and skewness of one channel, population form.
ColorMoments color_moments(const RgbImage& img, Channel channel);

/// Pixel offset between the two members of a co-occurring pair: the partner
/// of (row, col) is (row + dy, col + dx).
struct Displacement {
  int dx = 1;
  int dy = 0;

  /// Throws ArgumentError for (0, 0).
  static Displacement make(int dx, int dy);

  friend bool operator==(const Displacement&, const Displacement&) = default;
};

/// Normalized, ordered (non-symmetric) gray-level co-occurrence matrix.
class Glcm {
 public:
  /// Builds from raw pair counts laid out row-major, `levels * levels` long.
  /// Throws ArgumentError on a size mismatch or an all-zero count matrix.
  static Glcm from_counts(int levels, std::span<const std::uint64_t> counts);

  int levels() const noexcept { return levels_; }
  std::uint64_t pair_count() const noexcept { return pair_count_; }
  double operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * levels_ + j]; }
  std::span<const double> entries() const noexcept { return entries_; }

 private:
  Glcm(int levels, std::uint64_t pair_count, std::vector<double> entries)
      : levels_(levels), pair_count_(pair_count), entries_(std::move(entries)) {}

  int levels_;
  std::uint64_t pair_count_;
  std::vector<double> entries_;
};

/// Counts every in-bounds pair (r, c) -> (r + dy, c + dx) and normalizes by the
/// number of pairs. Throws DegenerateInputError when no pair fits the image.
Glcm glcm(const GrayImage& img, Displacement d);

struct TextureMetrics {
  /// sum C ln C, with 0 ln 0 = 0. Non-positive: no leading minus sign.
  double entropy = 0.0;
  double energy = 0.0;
  double contrast = 0.0;
  double homogeneity = 0.0;
};

TextureMetrics texture_metrics(const Glcm& g);

inline constexpr std::size_t kFeatureCount = 13;

/// Canonical feature names in vector order. Joined with ',' this is the
/// feature-order tag stored in model files and the feature dump header.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "entropy", "energy", "contrast", "homogeneity", "mean_r", "std_r", "skew_r",
    "mean_g",  "std_g",  "skew_g",   "mean_b",      "std_b",  "skew_b"};

std::string feature_order_tag();

/// Texture metrics followed by the R, G, B color moments.
struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureConfig {
  Displacement displacement{};
  int levels = 256;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Texture from the quantized luma image, moments from the raw channels.
FeatureVector extract_features(const RgbImage& img, const FeatureConfig& cfg = {});

struct Range {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

struct NormalizationRanges {
  std::array<Range, kFeatureCount> ranges{};

  friend bool operator==(const NormalizationRanges&, const NormalizationRanges&) = default;
};

/// Per-feature min/max. Throws ArgumentError on an empty list.
NormalizationRanges fit_ranges(std::span<const FeatureVector> vectors);

/// Affine map of [min, max] onto [-1, 1]; constant features map to 0. Values
/// outside the fitted range extrapolate.
FeatureVector normalize(const FeatureVector& v, const NormalizationRanges& r);

}  // namespace skintex
