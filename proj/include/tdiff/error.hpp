#pragma once

#include <stdexcept>
#include <string>

namespace tdiff {

enum class Errc {
  EmptyRegion,
  DimensionMismatch,
  UnboundedWithoutTruncation,
  NotReachable,
  OutsideDomain,
  OracleNotInvertible,
  EvaluationFailure,
  NotOnGraph,
  CoverageGap,
  NotScalar,
  InsufficientSamples,
  NotInSet,
  CriterionFails,
  PartitionGap,
  HypothesisFailure,
  GaugeUnbounded,
  ComplexityBudgetExceeded,
  UnsupportedDimension,
  ParseError,
  UnknownName,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code_(c) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) { throw Error(c, msg); }

}  // namespace tdiff
