#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qvdp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when a state no longer satisfies the density-matrix invariants.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Population leaked into the top of the Fock ladder; raise n_max.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Trace of an evolved state drifted past the allowed bound; shrink dt.
class TraceDriftError : public Error {
 public:
  using Error::Error;
};

class SteadyStateError : public Error {
 public:
  enum class Kind { no_rates, no_zero_eigenvalue, degenerate, small_gap };
  SteadyStateError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics. Operations that "flag" append here instead of throwing.
struct Flags {
  std::vector<std::string> messages;

  void raise(std::string message) { messages.push_back(std::move(message)); }
  bool any() const { return !messages.empty(); }
};

inline void raise_flag(Flags* flags, std::string message) {
  if (flags != nullptr) flags->raise(std::move(message));
}

}  // namespace qvdp
