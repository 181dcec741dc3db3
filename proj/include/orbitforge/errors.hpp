#pragma once

#include <stdexcept>
#include <string>

namespace orbitforge {

// A rule tried to read past the ball boundary, or the ball is too small for
// the requested guarantee. Never a certificate failure.
class WindowExhausted : public std::runtime_error {
 public:
  explicit WindowExhausted(const std::string& what, std::string required_radius = {})
      : std::runtime_error(what), required_(std::move(required_radius)) {}
  const std::string& required_radius() const { return required_; }

 private:
  std::string required_;
};

// A postcondition of a construction stage did not hold.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken structural precondition, e.g. a degree bound exceeded.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace orbitforge
