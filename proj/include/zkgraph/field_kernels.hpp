#pragma once

// Element-wise field kernels over columns.
//
// A scalar reference implementation is always available; an AVX2 variant is
// compiled in its own translation unit and chosen at runtime when the CPU
// supports it. Setting ZKGRAPH_KERNELS=scalar in the environment forces the
// reference path. All variants are required to be bit-identical.

#include <cstddef>
#include <span>
#include <string_view>

#include "zkgraph/field.hpp"

namespace zkgraph::kernels {

// Output spans may alias inputs. All spans in one call have equal length.
struct KernelTable {
  std::string_view name;
  void (*add)(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b);
  void (*sub)(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b);
  void (*mul)(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b);
  void (*add_scalar)(std::span<Fe> out, std::span<const Fe> a, Fe s);
  void (*mul_scalar)(std::span<Fe> out, std::span<const Fe> a, Fe s);
  // out[i] = a[i] + s * b[i]
  void (*axpy)(std::span<Fe> out, std::span<const Fe> a, Fe s,
               std::span<const Fe> b);
};

const KernelTable& scalar_kernels();
// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();
// The variant selected for this process.
const KernelTable& active();

}  // namespace zkgraph::kernels
