#pragma once

#include <stdexcept>
#include <string>

namespace semplan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class MapErrorKind {
  Malformed,
  OutOfBounds,
  OverlappingClasses,
  StartInObstacle,
  GoalInObstacle,
  DuplicateClass,
  UnknownClass,
  Io,
};

class MapError : public Error {
public:
  MapError(MapErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  MapErrorKind kind() const noexcept { return kind_; }

private:
  MapErrorKind kind_;
};

enum class SensorErrorKind {
  Network,
  MalformedCompletion,
  Timeout,
  MissingCredentials,
  DigestMismatch,
  CacheParse,
  Io,
};

class SensorError : public Error {
public:
  SensorError(SensorErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  SensorErrorKind kind() const noexcept { return kind_; }

private:
  SensorErrorKind kind_;
};

/// Invalid argument or configuration value (bad alpha, k = 0, negative gamma, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Raised for queries that are not valid graph edges (non-adjacent or blocked target).
class PlanningError : public Error {
public:
  using Error::Error;
};

}  // namespace semplan
