#include "skintex/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "skintex/error.hpp"

namespace skintex {

namespace {

double signed_cbrt(double x) { return x < 0 ? -std::cbrt(-x) : std::cbrt(x); }

std::uint8_t channel_value(const Rgb& px, Channel c) {
  switch (c) {
    case Channel::kRed:
      return px.r;
    case Channel::kGreen:
      return px.g;
    case Channel::kBlue:
      break;
  }
  return px.b;
}

// Moments over the integer deviations d = n*p - S, where S is the channel sum.
// Summing the d^k exactly makes the result depend only on the value multiset
// and leaves it unchanged under a constant shift of every value. The 128-bit
// accumulators hold n^4 * 255^3 for n up to 2^24 pixels.
__extension__ typedef __int128 Wide;
constexpr std::size_t kExactLimit = std::size_t{1} << 24;

ColorMoments exact_moments(const RgbImage& img, Channel channel) {
  const auto n = static_cast<std::int64_t>(img.pixels().size());
  std::int64_t sum = 0;
  for (const Rgb& px : img.pixels()) sum += channel_value(px, channel);

  Wide m2 = 0;
  Wide m3 = 0;
  for (const Rgb& px : img.pixels()) {
    const Wide d = n * channel_value(px, channel) - sum;
    m2 += d * d;
    m3 += d * d * d;
  }
  const long double nn = static_cast<long double>(n);
  ColorMoments out;
  out.mean = static_cast<double>(static_cast<long double>(sum) / nn);
  out.std_dev = static_cast<double>(std::sqrt(static_cast<long double>(m2) / (nn * nn * nn)));
  out.skewness = signed_cbrt(static_cast<double>(static_cast<long double>(m3) / (nn * nn * nn * nn)));
  return out;
}

ColorMoments two_pass_moments(const RgbImage& img, Channel channel) {
  const long double n = static_cast<long double>(img.pixels().size());
  long double sum = 0;
  for (const Rgb& px : img.pixels()) sum += channel_value(px, channel);
  const long double mean = sum / n;
  long double m2 = 0;
  long double m3 = 0;
  for (const Rgb& px : img.pixels()) {
    const long double d = channel_value(px, channel) - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(m2 / n)),
          signed_cbrt(static_cast<double>(m3 / n))};
}

}  // namespace

ColorMoments color_moments(const RgbImage& img, Channel channel) {
  if (img.pixels().size() <= kExactLimit) return exact_moments(img, channel);
  return two_pass_moments(img, channel);
}

Displacement Displacement::make(int dx, int dy) {
  if (dx == 0 && dy == 0) throw ArgumentError("displacement (0,0) is not allowed");
  return Displacement{dx, dy};
}

Glcm Glcm::from_counts(int levels, std::span<const std::uint64_t> counts) {
  if (levels < 1 || counts.size() != static_cast<std::size_t>(levels) * static_cast<std::size_t>(levels)) {
    throw ArgumentError("co-occurrence counts must form a levels x levels matrix");
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw ArgumentError("co-occurrence matrix has no pairs");

  std::vector<double> entries(counts.size());
  const auto denom = static_cast<double>(total);
  std::transform(counts.begin(), counts.end(), entries.begin(),
                 [denom](std::uint64_t c) { return static_cast<double>(c) / denom; });
  return Glcm(levels, total, std::move(entries));
}

Glcm glcm(const GrayImage& img, Displacement d) {
  if (d.dx == 0 && d.dy == 0) throw ArgumentError("displacement (0,0) is not allowed");
  const int row_begin = std::max(0, -d.dy);
  const int row_end = std::min(img.height(), img.height() - d.dy);
  const int col_begin = std::max(0, -d.dx);
  const int col_end = std::min(img.width(), img.width() - d.dx);
  if (row_begin >= row_end || col_begin >= col_end) {
    throw DegenerateInputError("no pixel pair fits a " + std::to_string(img.width()) + "x" +
                               std::to_string(img.height()) + " image at displacement (" +
                               std::to_string(d.dx) + "," + std::to_string(d.dy) + ")");
  }

  const auto levels = static_cast<std::size_t>(img.levels());
  std::vector<std::uint64_t> counts(levels * levels, 0);
  for (int r = row_begin; r < row_end; ++r) {
    for (int c = col_begin; c < col_end; ++c) {
      const auto i = static_cast<std::size_t>(img.at(r, c));
      const auto j = static_cast<std::size_t>(img.at(r + d.dy, c + d.dx));
      ++counts[i * levels + j];
    }
  }
  return Glcm::from_counts(img.levels(), counts);
}

TextureMetrics texture_metrics(const Glcm& g) {
  TextureMetrics m;
  const int levels = g.levels();
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j) {
      const double c = g(i, j);
      if (c == 0.0) continue;
      const int diff = std::abs(i - j);
      m.entropy += c * std::log(c);
      m.energy += c * c;
      m.contrast += static_cast<double>(diff) * diff * c;
      m.homogeneity += c / (1.0 + diff);
    }
  }
  return m;
}

std::string feature_order_tag() {
  std::string tag;
  for (auto name : kFeatureNames) {
    if (!tag.empty()) tag += ',';
    tag += name;
  }
  return tag;
}

FeatureVector extract_features(const RgbImage& img, const FeatureConfig& cfg) {
  GrayImage gray = to_gray(img);
  if (cfg.levels != gray.levels()) gray = quantize(gray, cfg.levels);
  const TextureMetrics t = texture_metrics(glcm(gray, cfg.displacement));

  FeatureVector v;
  v[0] = t.entropy;
  v[1] = t.energy;
  v[2] = t.contrast;
  v[3] = t.homogeneity;
  std::size_t k = 4;
  for (Channel c : {Channel::kRed, Channel::kGreen, Channel::kBlue}) {
    const ColorMoments cm = color_moments(img, c);
    v[k++] = cm.mean;
    v[k++] = cm.std_dev;
    v[k++] = cm.skewness;
  }
  return v;
}

NormalizationRanges fit_ranges(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) throw ArgumentError("cannot fit normalization ranges to an empty set");
  NormalizationRanges out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) out.ranges[i] = {vectors[0][i], vectors[0][i]};
  for (const FeatureVector& v : vectors.subspan(1)) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      out.ranges[i].min = std::min(out.ranges[i].min, v[i]);
      out.ranges[i].max = std::max(out.ranges[i].max, v[i]);
    }
  }
  return out;
}

FeatureVector normalize(const FeatureVector& v, const NormalizationRanges& r) {
  FeatureVector out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const Range& range = r.ranges[i];
    out[i] = range.max > range.min ? 2.0 * (v[i] - range.min) / (range.max - range.min) - 1.0 : 0.0;
  }
  return out;
}

}  // namespace skintex
