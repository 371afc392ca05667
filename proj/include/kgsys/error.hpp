#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kgsys {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RepresentationMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NumericalBlowUp : public Error {
 public:
  NumericalBlowUp(double t, const std::string& what)
      : Error("numerical blow-up at t = " + std::to_string(t) + ": " + what), time(t) {}
  double time;
};

class QuadratureResolution : public Error {
 public:
  QuadratureResolution(std::size_t required, const std::string& what)
      : Error(what + " (requires at least " + std::to_string(required) + " nodes)"),
        required_nodes(required) {}
  std::size_t required_nodes;
};

// A module error raised while running one check of a scenario.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string scenario_name, std::string check_name, const std::string& what)
      : Error("scenario '" + scenario_name + "', check '" + check_name + "': " + what),
        scenario(std::move(scenario_name)),
        check(std::move(check_name)) {}
  std::string scenario;
  std::string check;
};

// Non-fatal diagnostics (boundary contamination and the like) are appended here
// when the caller passes a sink.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace kgsys
