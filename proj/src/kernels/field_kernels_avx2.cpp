// AVX2 variant of the field kernels. Four 64-bit lanes per register; the
// 64x64 -> 128 bit product is assembled from _mm256_mul_epu32 partials.

#include <immintrin.h>

#include "zkgraph/field_kernels.hpp"

namespace zkgraph::kernels {
namespace {

inline __m256i sign_bit() {
  return _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ULL));
}
inline __m256i eps() {
  return _mm256_set1_epi64x(static_cast<long long>(Fe::kEpsilon));
}
inline __m256i modulus() {
  return _mm256_set1_epi64x(static_cast<long long>(Fe::kModulus));
}

// All-ones lanes where a < b (unsigned).
inline __m256i lt_u64(__m256i a, __m256i b) {
  return _mm256_cmpgt_epi64(_mm256_xor_si256(b, sign_bit()),
                            _mm256_xor_si256(a, sign_bit()));
}

inline __m256i canonicalize(__m256i x) {
  const __m256i ge =
      _mm256_andnot_si256(lt_u64(x, modulus()), _mm256_set1_epi64x(-1));
  return _mm256_sub_epi64(x, _mm256_and_si256(ge, modulus()));
}

inline __m256i add4(__m256i a, __m256i b) {
  __m256i s = _mm256_add_epi64(a, b);
  s = _mm256_add_epi64(s, _mm256_and_si256(lt_u64(s, a), eps()));
  return canonicalize(s);
}

inline __m256i sub4(__m256i a, __m256i b) {
  const __m256i d = _mm256_sub_epi64(a, b);
  return _mm256_sub_epi64(d, _mm256_and_si256(lt_u64(a, b), eps()));
}

inline __m256i mul4(__m256i a, __m256i b) {
  const __m256i a_hi = _mm256_srli_epi64(a, 32);
  const __m256i b_hi = _mm256_srli_epi64(b, 32);
  const __m256i ll = _mm256_mul_epu32(a, b);
  const __m256i lh = _mm256_mul_epu32(a, b_hi);
  const __m256i hl = _mm256_mul_epu32(a_hi, b);
  const __m256i hh = _mm256_mul_epu32(a_hi, b_hi);

  const __m256i mid = _mm256_add_epi64(lh, hl);
  const __m256i mid_carry = _mm256_srli_epi64(lt_u64(mid, lh), 63);
  const __m256i lo = _mm256_add_epi64(ll, _mm256_slli_epi64(mid, 32));
  const __m256i lo_carry = _mm256_srli_epi64(lt_u64(lo, ll), 63);
  __m256i hi = _mm256_add_epi64(hh, _mm256_srli_epi64(mid, 32));
  hi = _mm256_add_epi64(hi, _mm256_slli_epi64(mid_carry, 32));
  hi = _mm256_add_epi64(hi, lo_carry);

  // Reduce hi * 2^64 + lo with 2^64 = eps and 2^96 = -1.
  const __m256i hi_hi = _mm256_srli_epi64(hi, 32);
  const __m256i hi_lo =
      _mm256_and_si256(hi, _mm256_set1_epi64x(0xFFFFFFFFLL));
  __m256i t0 = _mm256_sub_epi64(lo, hi_hi);
  t0 = _mm256_sub_epi64(t0, _mm256_and_si256(lt_u64(lo, hi_hi), eps()));
  const __m256i t1 = _mm256_sub_epi64(_mm256_slli_epi64(hi_lo, 32), hi_lo);
  __m256i r = _mm256_add_epi64(t0, t1);
  r = _mm256_add_epi64(r, _mm256_and_si256(lt_u64(r, t1), eps()));
  return canonicalize(r);
}

inline __m256i load(const Fe* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}
inline void store(Fe* p, __m256i v) {
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v);
}

template <typename VecOp, typename ScalarOp>
void binary(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b,
            VecOp vop, ScalarOp sop) {
  const size_t n = out.size();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) store(&out[i], vop(load(&a[i]), load(&b[i])));
  for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void add(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b) {
  binary(out, a, b, add4, [](Fe x, Fe y) { return x + y; });
}

void sub(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b) {
  binary(out, a, b, sub4, [](Fe x, Fe y) { return x - y; });
}

void mul(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b) {
  binary(out, a, b, mul4, [](Fe x, Fe y) { return x * y; });
}

void add_scalar(std::span<Fe> out, std::span<const Fe> a, Fe s) {
  const __m256i sv = _mm256_set1_epi64x(static_cast<long long>(s.value()));
  const size_t n = out.size();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) store(&out[i], add4(load(&a[i]), sv));
  for (; i < n; ++i) out[i] = a[i] + s;
}

void mul_scalar(std::span<Fe> out, std::span<const Fe> a, Fe s) {
  const __m256i sv = _mm256_set1_epi64x(static_cast<long long>(s.value()));
  const size_t n = out.size();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) store(&out[i], mul4(load(&a[i]), sv));
  for (; i < n; ++i) out[i] = a[i] * s;
}

void axpy(std::span<Fe> out, std::span<const Fe> a, Fe s,
          std::span<const Fe> b) {
  const __m256i sv = _mm256_set1_epi64x(static_cast<long long>(s.value()));
  const size_t n = out.size();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    store(&out[i], add4(load(&a[i]), mul4(sv, load(&b[i]))));
  }
  for (; i < n; ++i) out[i] = a[i] + s * b[i];
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", add, sub, mul, add_scalar,
                                 mul_scalar, axpy};
  return table;
}

}  // namespace zkgraph::kernels
