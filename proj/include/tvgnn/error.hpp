#pragma once

#include <stdexcept>
#include <string>

namespace tvgnn {

// Base for everything thrown by the library. Subcommands map these to
// process exit codes (2 for config/usage, 3 for numerical aborts).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeMismatch : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonFiniteValue : Error {
  using Error::Error;
};
struct NonScalarLoss : Error {
  using Error::Error;
};
struct KinkProximity : Error {
  using Error::Error;
};
struct IsolatedVertex : Error {
  explicit IsolatedVertex(std::size_t v)
      : Error("vertex " + std::to_string(v) + " has degree 0"), vertex(v) {}
  std::size_t vertex;
};
struct InvalidSize : Error {
  using Error::Error;
};
struct InvalidProbability : Error {
  using Error::Error;
};
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
  std::size_t line;
};
struct DanglingVertexId : Error {
  using Error::Error;
};
struct EmptyCollection : Error {
  using Error::Error;
};
struct AsymmetricInput : Error {
  using Error::Error;
};
struct EmptyVector : Error {
  using Error::Error;
};
struct EmptyAssignment : Error {
  using Error::Error;
};
struct EmptyGraph : Error {
  using Error::Error;
};
struct LabelOutOfRange : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};
struct NonSquare : Error {
  using Error::Error;
};
struct ClassTooSmall : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct NonFiniteLoss : Error {
  NonFiniteLoss(std::size_t epoch, const std::string& detail)
      : Error("non-finite loss at epoch " + std::to_string(epoch) + ": " + detail),
        epoch(epoch) {}
  std::size_t epoch;
};

}  // namespace tvgnn
