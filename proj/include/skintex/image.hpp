#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace skintex {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class Channel { kRed, kGreen, kBlue };

/// Row-major 8-bit RGB image. Width counts columns, height counts rows.
class RgbImage {
 public:
  /// Throws ArgumentError on a zero dimension or a pixel count mismatch.
  RgbImage(int width, int height, std::vector<Rgb> pixels);
  RgbImage(int width, int height, Rgb fill);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const Rgb> pixels() const noexcept { return pixels_; }

  const Rgb& at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
  Rgb& at(int row, int col) { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

/// Row-major gray image over the alphabet [0, levels).
class GrayImage {
 public:
  /// Throws ArgumentError on a zero dimension, levels outside [2, 256],
  /// a pixel count mismatch, or a pixel value >= levels.
  GrayImage(int width, int height, int levels, std::vector<std::uint16_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int levels() const noexcept { return levels_; }
  std::span<const std::uint16_t> pixels() const noexcept { return pixels_; }

  int at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_;
  int height_;
  int levels_;
  std::vector<std::uint16_t> pixels_;
};

/// BT.601 luma, round half up, 256 levels.
GrayImage to_gray(const RgbImage& img);

/// Maps p to floor(p * target_levels / img.levels()).
/// Throws ArgumentError unless 2 <= target_levels <= img.levels().
GrayImage quantize(const GrayImage& img, int target_levels);

}  // namespace skintex
