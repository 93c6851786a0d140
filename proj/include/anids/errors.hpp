#pragma once

#include <stdexcept>
#include <string>

namespace anids {

struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

struct CoincidentAtoms : std::runtime_error {
  explicit CoincidentAtoms(const std::string& what) : std::runtime_error(what) {}
};

struct Diverged : std::runtime_error {
  explicit Diverged(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyMask : std::runtime_error {
  explicit EmptyMask(const std::string& what) : std::runtime_error(what) {}
};

struct MissingLabels : std::runtime_error {
  explicit MissingLabels(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteGradient : std::runtime_error {
  explicit NonFiniteGradient(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace anids
