#pragma once

// Arithmetic in the prime field F_p with p = 2^64 - 2^32 + 1.
//
// Every circuit cell, challenge and public value is an Fe. Values are always
// kept in canonical form [0, p), so equal elements have equal byte encodings.

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace zkgraph {

class Fe {
 public:
  static constexpr uint64_t kModulus = 0xFFFFFFFF00000001ULL;
  // 2^64 mod p.
  static constexpr uint64_t kEpsilon = 0xFFFFFFFFULL;

  constexpr Fe() = default;
  // Reduces an arbitrary 64-bit integer.
  constexpr explicit Fe(uint64_t v) : v_(v >= kModulus ? v - kModulus : v) {}

  static constexpr Fe zero() { return Fe(); }
  static constexpr Fe one() { return Fe(1); }
  static Fe from_i64(int64_t v);

  constexpr uint64_t value() const { return v_; }
  constexpr bool is_zero() const { return v_ == 0; }

  friend constexpr bool operator==(Fe a, Fe b) = default;
  friend constexpr auto operator<=>(Fe a, Fe b) = default;

  friend constexpr Fe operator+(Fe a, Fe b) {
    uint64_t s = a.v_ + b.v_;
    if (s < a.v_) s += kEpsilon;  // wrapped past 2^64
    if (s >= kModulus) s -= kModulus;
    return from_canonical(s);
  }
  friend constexpr Fe operator-(Fe a, Fe b) {
    uint64_t d = a.v_ - b.v_;
    if (a.v_ < b.v_) d -= kEpsilon;  // add p modulo 2^64
    return from_canonical(d);
  }
  friend constexpr Fe operator-(Fe a) { return Fe() - a; }
  friend constexpr Fe operator*(Fe a, Fe b) {
    return from_canonical(reduce128(static_cast<unsigned __int128>(a.v_) * b.v_));
  }
  Fe& operator+=(Fe o) { return *this = *this + o; }
  Fe& operator-=(Fe o) { return *this = *this - o; }
  Fe& operator*=(Fe o) { return *this = *this * o; }

  Fe pow(uint64_t e) const;
  // Throws Error(InversionOfZero) for zero.
  Fe inverse() const;

  std::array<uint8_t, 8> to_le_bytes() const;
  static Fe from_le_bytes(std::span<const uint8_t, 8> bytes);

  std::string to_string() const { return std::to_string(v_); }

  // Reduces a 128-bit product using 2^64 = 2^32 - 1 and 2^96 = -1 (mod p).
  static constexpr uint64_t reduce128(unsigned __int128 x) {
    const uint64_t lo = static_cast<uint64_t>(x);
    const uint64_t hi = static_cast<uint64_t>(x >> 64);
    const uint64_t hi_hi = hi >> 32;
    const uint64_t hi_lo = hi & kEpsilon;
    uint64_t t0 = lo - hi_hi;
    if (lo < hi_hi) t0 -= kEpsilon;
    const uint64_t t1 = (hi_lo << 32) - hi_lo;
    uint64_t r = t0 + t1;
    if (r < t1) r += kEpsilon;
    if (r >= kModulus) r -= kModulus;
    return r;
  }

 private:
  static constexpr Fe from_canonical(uint64_t v) {
    Fe f;
    f.v_ = v;
    return f;
  }

  uint64_t v_ = 0;
};

static_assert(sizeof(Fe) == sizeof(uint64_t));

Fe fe_add(Fe a, Fe b);
Fe fe_mul(Fe a, Fe b);
Fe fe_inv(Fe a);
// Interprets exactly 32 bytes as a big-endian integer and reduces mod p.
// Throws Error(WrongLength) otherwise.
Fe fe_from_bytes_wide(std::span<const uint8_t> bytes);

// Montgomery batch inversion. Throws Error(InversionOfZero) if any input is 0.
std::vector<Fe> batch_inverse(std::span<const Fe> values);

}  // namespace zkgraph
