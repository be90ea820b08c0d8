#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phasebal {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidAssignment : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t lhs, std::size_t rhs)
      : Error("length mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}
};

class EmptySeries : public Error {
 public:
  EmptySeries() : Error("series is empty") {}
};

class ZeroMeanCurrent : public Error {
 public:
  ZeroMeanCurrent() : Error("mean phase current is zero") {}
};

class NoMovableCustomers : public Error {
 public:
  NoMovableCustomers() : Error("network has no movable customers") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by the file readers. line is 1-based, 0 when not attributable.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// Wraps an error raised while processing one snapshot of a profile.
class SnapshotError : public Error {
 public:
  SnapshotError(std::size_t index, const std::string& what)
      : Error("snapshot " + std::to_string(index) + ": " + what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace phasebal
