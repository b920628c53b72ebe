#include "skintex/image.hpp"

#include <string>

#include "skintex/error.hpp"

namespace skintex {

namespace {

std::size_t checked_area(int width, int height) {
  if (width < 1 || height < 1) {
    throw ArgumentError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
  }
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

RgbImage::RgbImage(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != checked_area(width, height)) {
    throw ArgumentError("pixel count does not match image dimensions");
  }
}

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height), pixels_(checked_area(width, height), fill) {}

GrayImage::GrayImage(int width, int height, int levels, std::vector<std::uint16_t> pixels)
    : width_(width), height_(height), levels_(levels), pixels_(std::move(pixels)) {
  if (levels < 2 || levels > 256) {
    throw ArgumentError("gray levels must lie in [2, 256], got " + std::to_string(levels));
  }
  if (pixels_.size() != checked_area(width, height)) {
    throw ArgumentError("pixel count does not match image dimensions");
  }
  for (auto p : pixels_) {
    if (p >= levels) throw ArgumentError("gray value " + std::to_string(p) + " outside alphabet");
  }
}

GrayImage to_gray(const RgbImage& img) {
  std::vector<std::uint16_t> out;
  out.reserve(img.pixels().size());
  for (const Rgb& px : img.pixels()) {
    // Weights scaled by 1000 keep the luma exact; +500 rounds half up.
    const int scaled = 299 * px.r + 587 * px.g + 114 * px.b;
    out.push_back(static_cast<std::uint16_t>((scaled + 500) / 1000));
  }
  return GrayImage(img.width(), img.height(), 256, std::move(out));
}

GrayImage quantize(const GrayImage& img, int target_levels) {
  if (target_levels < 2 || target_levels > img.levels()) {
    throw ArgumentError("target levels " + std::to_string(target_levels) + " outside [2, " +
                        std::to_string(img.levels()) + "]");
  }
  std::vector<std::uint16_t> out;
  out.reserve(img.pixels().size());
  for (auto p : img.pixels()) {
    out.push_back(static_cast<std::uint16_t>(p * target_levels / img.levels()));
  }
  return GrayImage(img.width(), img.height(), target_levels, std::move(out));
}

}  // namespace skintex
