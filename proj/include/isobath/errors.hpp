#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isobath {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameters detected before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A linear solve or quadrature could not reach the required accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Query outside the domain of a bounded representation (e.g. gridded bathymetry).
class DomainError : public Error {
 public:
  using Error::Error;
};

class EncodeError : public Error {
 public:
  EncodeError(std::string section, const std::string& what)
      : Error("encode: " + section + ": " + what), section_(std::move(section)) {}
  const std::string& section() const noexcept { return section_; }

 private:
  std::string section_;
};

class DecodeError : public Error {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : Error("decode at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace isobath
