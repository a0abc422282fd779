#pragma once

// Fiat-Shamir transcript over SHA-256.
//
// state_0 = H("ZKGRAPH/v1"); absorbing x gives state' = H(state || x).
// A challenge for round tag t is fe_from_bytes_wide(H(state || t)).

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "zkgraph/constraint_table.hpp"
#include "zkgraph/sha256.hpp"

namespace zkgraph {

inline constexpr std::string_view kDomainTag = "ZKGRAPH/v1";
inline constexpr uint32_t kMaxChallengeRetries = 4;

class Transcript {
 public:
  Transcript();

  void absorb(std::span<const uint8_t> bytes);
  void absorb(const Digest& d) { absorb(std::span<const uint8_t>(d)); }
  Fe challenge(std::string_view round_tag) const;
  const Digest& state() const { return state_; }

 private:
  Digest state_;
};

struct Challenges {
  Fe alpha;
  Fe beta;
  uint32_t retry = 0;
};

// Derives (alpha, beta) for a given retry counter from the phase-1 advice
// commitments. Retry r > 0 absorbs "retry" || r_u32_le before beta.
Challenges challenges_from_commitments(std::span<const Digest> commitments,
                                       uint32_t retry = 0);

// Commits the phase-1 advice of `table`, derives the challenges and stores
// them in the table. Errors: CommitmentsMissing when `commitments` does not
// cover every phase-1 advice column.
Challenges derive_challenges(ConstraintTable& table,
                             std::span<const Digest> commitments,
                             uint32_t retry = 0);

// Full prover-side finalization: commit phase-1 advice, derive challenges,
// fill the running products, retrying beta on a zero denominator up to
// kMaxChallengeRetries times. Errors: DivisionByZeroDenominator after the
// retries are exhausted.
Challenges finalize_witness(ConstraintTable& table);

}  // namespace zkgraph
