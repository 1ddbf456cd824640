#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jumplq {

/// Non-finite values, failed factorizations, or blow-up during integration.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A failure inside a Monte Carlo path, tagged with where it happened.
class SimulationFailure : public NumericalFailure {
 public:
  SimulationFailure(int path, int step, const std::string& what)
      : NumericalFailure(what), path_(path), step_(step) {}
  int path() const { return path_; }
  int step() const { return step_; }

 private:
  int path_;
  int step_;
};

class OutOfHorizon : public std::out_of_range {
 public:
  explicit OutOfHorizon(double t)
      : std::out_of_range("time " + std::to_string(t) + " is outside the horizon"),
        time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Which solvability gate failed.
enum class Regularity { Psd, Range, RangeFeedforward };

constexpr std::string_view to_string(Regularity r) {
  switch (r) {
    case Regularity::Psd: return "PSD";
    case Regularity::Range: return "RANGE";
    case Regularity::RangeFeedforward: return "RANGE_FEEDFORWARD";
  }
  return "UNKNOWN";
}

/// Raised by a right-hand side evaluation whose gate check fails.
class RegularityViolation : public std::runtime_error {
 public:
  RegularityViolation(double t, Regularity which)
      : std::runtime_error("regularity gate " + std::string(to_string(which)) +
                           " failed at t=" + std::to_string(t)),
        time_(t), which_(which) {}
  double time() const { return time_; }
  Regularity which() const { return which_; }

 private:
  double time_;
  Regularity which_;
};

/// No closed-loop optimal strategy exists for the data (or the numerical
/// gates could not certify one).
class ClosedLoopUnsolvable : public std::runtime_error {
 public:
  ClosedLoopUnsolvable(double t, Regularity reason)
      : std::runtime_error("closed-loop unsolvable at t=" + std::to_string(t) +
                           " (" + std::string(to_string(reason)) + ")"),
        time_(t), reason_(reason) {}
  double time() const { return time_; }
  Regularity reason() const { return reason_; }

 private:
  double time_;
  Regularity reason_;
};

}  // namespace jumplq
