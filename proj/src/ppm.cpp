#include "skintex/ppm.hpp"

#include <fstream>
#include <iterator>
#include <string>

#include "skintex/error.hpp"

namespace skintex::ppm {

namespace {

using Kind = PpmParseError::Kind;

constexpr long kMaxDimension = 1L << 16;

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }
bool is_digit(std::uint8_t c) { return c >= '0' && c <= '9'; }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t peek() const { return bytes_[pos_]; }
  std::uint8_t next() { return bytes_[pos_++]; }

  void skip_space_and_comments() {
    while (!at_end()) {
      if (is_space(peek())) {
        ++pos_;
      } else if (peek() == '#') {
        while (!at_end() && peek() != '\n' && peek() != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  // Reads an unsigned decimal token that must be preceded by whitespace.
  long number(Kind kind, const char* what) {
    const std::size_t before = pos_;
    skip_space_and_comments();
    if (at_end()) throw PpmParseError(Kind::kTruncated, pos_, std::string("missing ") + what);
    if (pos_ == before) throw PpmParseError(kind, pos_, std::string("expected whitespace before ") + what);
    if (!is_digit(peek())) throw PpmParseError(kind, pos_, std::string("expected decimal ") + what);
    const std::size_t start = pos_;
    long value = 0;
    while (!at_end() && is_digit(peek())) {
      value = value * 10 + (next() - '0');
      if (value > 1'000'000'000L) throw PpmParseError(kind, start, std::string(what) + " too large");
    }
    if (!at_end() && !is_space(peek()) && peek() != '#') {
      throw PpmParseError(kind, pos_, std::string("unexpected byte after ") + what);
    }
    return value;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

RgbImage decode(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  if (bytes.size() < 2) throw PpmParseError(Kind::kTruncated, bytes.size(), "missing magic number");
  if (bytes[0] != 'P' || (bytes[1] != '3' && bytes[1] != '6')) {
    throw PpmParseError(Kind::kBadMagic, 0, "unsupported magic number (want P3 or P6)");
  }
  const bool binary = bytes[1] == '6';
  in.next();
  in.next();

  const std::size_t width_at = in.pos();
  const long width = in.number(Kind::kBadHeader, "width");
  const long height = in.number(Kind::kBadHeader, "height");
  if (width < 1 || height < 1 || width > kMaxDimension || height > kMaxDimension) {
    throw PpmParseError(Kind::kBadDimensions, width_at,
                        "invalid dimensions " + std::to_string(width) + "x" + std::to_string(height));
  }
  const std::size_t maxval_at = in.pos();
  const long maxval = in.number(Kind::kBadHeader, "maxval");
  if (maxval != 255) {
    throw PpmParseError(Kind::kBadMaxval, maxval_at, "maxval must be 255, got " + std::to_string(maxval));
  }

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<Rgb> pixels(count);

  if (binary) {
    if (in.at_end()) throw PpmParseError(Kind::kTruncated, in.pos(), "missing separator after maxval");
    in.next();  // exactly one whitespace byte precedes the payload
    if (in.remaining() < count * 3) {
      throw PpmParseError(Kind::kTruncated, bytes.size(),
                          "pixel data truncated: need " + std::to_string(count * 3) + " bytes, have " +
                              std::to_string(in.remaining()));
    }
    for (Rgb& px : pixels) {
      px.r = in.next();
      px.g = in.next();
      px.b = in.next();
    }
  } else {
    for (Rgb& px : pixels) {
      for (std::uint8_t* sample : {&px.r, &px.g, &px.b}) {
        const std::size_t at = in.pos();
        const long v = in.number(Kind::kBadSample, "sample");
        if (v > 255) throw PpmParseError(Kind::kBadSample, at, "sample exceeds maxval");
        *sample = static_cast<std::uint8_t>(v);
      }
    }
  }
  return RgbImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

std::vector<std::uint8_t> encode(const RgbImage& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.pixels().size() * 3);
  for (const Rgb& px : img.pixels()) {
    out.push_back(px.r);
    out.push_back(px.g);
    out.push_back(px.b);
  }
  return out;
}

RgbImage read_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

void write_file(const std::filesystem::path& path, const RgbImage& img) {
  const auto bytes = encode(img);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw Error("write failed for " + path.string());
}

}  // namespace skintex::ppm
