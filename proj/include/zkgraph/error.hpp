#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zkgraph {

enum class ErrorCode {
  // field
  InversionOfZero,
  WrongLength,
  // constraint system
  BadArity,
  UnknownColumn,
  RowsNotPowerOfTwo,
  TooManyRows,
  CommitmentsMissing,
  ChallengesMissing,
  DivisionByZeroDenominator,
  BadDeclaration,
  // graph store
  ParseError,
  DanglingEdge,
  DuplicateNodeId,
  IdOutOfRange,
  TargetTooSmall,
  // operators
  UnknownNode,
  SentinelCollision,
  DmaxTooSmall,
  NotReachable,
  BadParameter,
  // planner
  SyntaxError,
  UnknownOperator,
  UnboundInput,
  UnboundParam,
  TypeMismatch,
  RowBudgetExceeded,
  // bundle / io
  MalformedBundle,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace zkgraph
