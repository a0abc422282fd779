#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace zkgraph {

using Digest = std::array<uint8_t, 32>;

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256& other);
  Sha256& operator=(const Sha256& other);
  Sha256(Sha256&&) noexcept;
  Sha256& operator=(Sha256&&) noexcept;

  Sha256& update(std::span<const uint8_t> data);
  Sha256& update(std::string_view data);
  Sha256& update_u8(uint8_t v);
  Sha256& update_u16_le(uint16_t v);
  Sha256& update_u32_le(uint32_t v);
  Sha256& update_u64_le(uint64_t v);
  Digest finish();

  static Digest hash(std::span<const uint8_t> data);
  static Digest hash(std::string_view data);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string to_hex(std::span<const uint8_t> bytes);
// Returns false on malformed input.
bool from_hex(std::string_view hex, Digest& out);

}  // namespace zkgraph
