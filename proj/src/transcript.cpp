#include "zkgraph/transcript.hpp"

#include "zkgraph/error.hpp"

namespace zkgraph {

Transcript::Transcript() : state_(Sha256::hash(kDomainTag)) {}

void Transcript::absorb(std::span<const uint8_t> bytes) {
  state_ = Sha256().update(state_).update(bytes).finish();
}

Fe Transcript::challenge(std::string_view round_tag) const {
  const Digest d = Sha256().update(state_).update(round_tag).finish();
  return fe_from_bytes_wide(d);
}

Challenges challenges_from_commitments(std::span<const Digest> commitments,
                                       uint32_t retry) {
  Transcript t;
  for (const auto& c : commitments) t.absorb(c);
  Challenges out;
  out.alpha = t.challenge("alpha");
  out.retry = retry;
  if (retry > 0) {
    uint8_t buf[9] = {'r', 'e', 't', 'r', 'y'};
    for (int i = 0; i < 4; ++i) buf[5 + i] = static_cast<uint8_t>(retry >> (8 * i));
    t.absorb(std::span<const uint8_t>(buf, 9));
  }
  out.beta = t.challenge("beta");
  return out;
}

Challenges derive_challenges(ConstraintTable& table,
                             std::span<const Digest> commitments, uint32_t retry) {
  size_t expected = 0;
  for (const auto& c : table.spec().columns) {
    if (c.id.kind == ColumnKind::Advice && c.phase == 1) ++expected;
  }
  if (commitments.size() != expected) {
    throw Error(ErrorCode::CommitmentsMissing,
                std::to_string(commitments.size()) + " commitments for " +
                    std::to_string(expected) + " advice columns");
  }
  auto ch = challenges_from_commitments(commitments, retry);
  table.set_challenges({ch.alpha, ch.beta});
  return ch;
}

Challenges finalize_witness(ConstraintTable& table) {
  const auto commitments = commit_phase(table, 1);
  for (uint32_t retry = 0;; ++retry) {
    auto ch = derive_challenges(table, commitments, retry);
    try {
      fill_running_products(table);
      return ch;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DivisionByZeroDenominator ||
          retry >= kMaxChallengeRetries) {
        throw;
      }
    }
  }
}

}  // namespace zkgraph
