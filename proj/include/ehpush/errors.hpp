#pragma once

#include <stdexcept>
#include <string>

namespace ehpush {

/// Invalid or inconsistent world/sweep configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A scenario script is malformed or violates energy causality.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// Attempt to spend more energy than the battery holds. Policies must
/// check affordability before acting, so this signals a policy bug.
class InsufficientEnergy : public std::logic_error {
 public:
  explicit InsufficientEnergy(const std::string& what) : std::logic_error(what) {}
};

/// Popularity queries on an empty catalog.
class EmptyCatalog : public std::invalid_argument {
 public:
  explicit EmptyCatalog(const std::string& what) : std::invalid_argument(what) {}
};

/// Exact enumeration asked for a state space beyond its bounds.
class OracleTooLarge : public std::invalid_argument {
 public:
  explicit OracleTooLarge(const std::string& what) : std::invalid_argument(what) {}
};

/// A caller violated a documented precondition (e.g. unsorted plot axis).
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Filesystem write failure, annotated with the path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ehpush
