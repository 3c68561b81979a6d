#pragma once

#include <stdexcept>
#include <string>

namespace hcn {

/// Base class for every error raised by the library. `kind()` is a short
/// stable tag used by the CLI to print machine-parseable diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error("dimension", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& m) : Error("index", m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& m) : Error("usage", m) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& m, std::size_t line)
      : Error("parse", "line " + std::to_string(line) + ": " + m), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& m) : Error("format", m) {}
};

class CompatibilityError : public Error {
 public:
  explicit CompatibilityError(const std::string& m) : Error("compatibility", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io", m) {}
};

}  // namespace hcn
