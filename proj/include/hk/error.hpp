#pragma once

#include <stdexcept>
#include <string>

namespace hk {

// Error taxonomy shared by the library and the CLI. The CLI maps kinds to
// process exit codes, the library throws and never exits.
enum class ErrorKind {
  Usage,            // bad arguments / flag validation
  Io,               // file read/write problems
  EmptyMeasure,     // operation requires a nonempty measure
  DimensionMismatch,
  ApexPoint,        // tangent operation anchored at the cone apex
  DiameterViolation,
  AtomMismatch,     // tangent field and measure atoms out of bijection
  ZeroMarginal,     // coupling marginal vanished for an atom
  NoFeasiblePair,   // every pair at infinite ground cost
  SingularPart,     // mass that would couple to the apex
  NegativeRatio,    // nonpositive density ratio, broken coupling
  RadialUnderflow,  // lifted radius collapsed toward the apex
  ZeroIncomingMass, // transport target atom with no incoming edge mass
  Solver,           // other solver-level failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace hk
