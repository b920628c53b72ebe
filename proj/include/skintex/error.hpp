#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skintex {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a function argument was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported PPM input. `offset()` is the byte position at
/// which decoding stopped.
class PpmParseError : public Error {
 public:
  enum class Kind { kBadMagic, kBadHeader, kBadDimensions, kBadMaxval, kTruncated, kBadSample };

  PpmParseError(Kind kind, std::size_t offset, const std::string& what)
      : Error("ppm: " + what + " at byte " + std::to_string(offset)), kind_(kind), offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// The image admits no pixel pair for the requested GLCM displacement.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ModelFormatError : public Error {
 public:
  enum class Kind { kSyntax, kVersion, kDimension, kNonFinite, kSchema };

  ModelFormatError(Kind kind, const std::string& what) : Error("model: " + what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Dataset layout or content problem found during ingestion.
class DatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace skintex
