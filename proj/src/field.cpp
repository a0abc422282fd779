#include "zkgraph/field.hpp"

#include "zkgraph/error.hpp"

namespace zkgraph {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InversionOfZero: return "InversionOfZero";
    case ErrorCode::WrongLength: return "WrongLength";
    case ErrorCode::BadArity: return "BadArity";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::RowsNotPowerOfTwo: return "RowsNotPowerOfTwo";
    case ErrorCode::TooManyRows: return "TooManyRows";
    case ErrorCode::CommitmentsMissing: return "CommitmentsMissing";
    case ErrorCode::ChallengesMissing: return "ChallengesMissing";
    case ErrorCode::DivisionByZeroDenominator: return "DivisionByZeroDenominator";
    case ErrorCode::BadDeclaration: return "BadDeclaration";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::IdOutOfRange: return "IdOutOfRange";
    case ErrorCode::TargetTooSmall: return "TargetTooSmall";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::SentinelCollision: return "SentinelCollision";
    case ErrorCode::DmaxTooSmall: return "DmaxTooSmall";
    case ErrorCode::NotReachable: return "NotReachable";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::UnboundInput: return "UnboundInput";
    case ErrorCode::UnboundParam: return "UnboundParam";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::RowBudgetExceeded: return "RowBudgetExceeded";
    case ErrorCode::MalformedBundle: return "MalformedBundle";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Fe Fe::from_i64(int64_t v) {
  if (v >= 0) return Fe(static_cast<uint64_t>(v));
  return -Fe(static_cast<uint64_t>(-(v + 1)) + 1);
}

Fe Fe::pow(uint64_t e) const {
  Fe base = *this;
  Fe acc = one();
  while (e != 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

Fe Fe::inverse() const {
  if (is_zero()) throw Error(ErrorCode::InversionOfZero, "inverse of 0");
  return pow(kModulus - 2);
}

std::array<uint8_t, 8> Fe::to_le_bytes() const {
  std::array<uint8_t, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(v_ >> (8 * i));
  return out;
}

Fe Fe::from_le_bytes(std::span<const uint8_t, 8> bytes) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return Fe(v);
}

Fe fe_add(Fe a, Fe b) { return a + b; }
Fe fe_mul(Fe a, Fe b) { return a * b; }
Fe fe_inv(Fe a) { return a.inverse(); }

Fe fe_from_bytes_wide(std::span<const uint8_t> bytes) {
  if (bytes.size() != 32) {
    throw Error(ErrorCode::WrongLength,
                "expected 32 bytes, got " + std::to_string(bytes.size()));
  }
  // Horner over 64-bit big-endian limbs: acc = acc * 2^64 + limb.
  const Fe two64(Fe::kEpsilon);
  Fe acc;
  for (size_t limb = 0; limb < 4; ++limb) {
    uint64_t v = 0;
    for (size_t i = 0; i < 8; ++i) v = (v << 8) | bytes[limb * 8 + i];
    acc = acc * two64 + Fe(v);
  }
  return acc;
}

std::vector<Fe> batch_inverse(std::span<const Fe> values) {
  std::vector<Fe> prefix(values.size());
  Fe acc = Fe::one();
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i].is_zero()) {
      throw Error(ErrorCode::InversionOfZero,
                  "batch inverse: zero at index " + std::to_string(i));
    }
    prefix[i] = acc;
    acc *= values[i];
  }
  Fe inv = acc.inverse();
  std::vector<Fe> out(values.size());
  for (size_t i = values.size(); i-- > 0;) {
    out[i] = inv * prefix[i];
    inv *= values[i];
  }
  return out;
}

}  // namespace zkgraph
