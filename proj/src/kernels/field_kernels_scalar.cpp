#include "zkgraph/field_kernels.hpp"

namespace zkgraph::kernels {
namespace {

void add(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b) {
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
}

void sub(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b) {
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
}

void mul(std::span<Fe> out, std::span<const Fe> a, std::span<const Fe> b) {
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
}

void add_scalar(std::span<Fe> out, std::span<const Fe> a, Fe s) {
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] + s;
}

void mul_scalar(std::span<Fe> out, std::span<const Fe> a, Fe s) {
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] * s;
}

void axpy(std::span<Fe> out, std::span<const Fe> a, Fe s,
          std::span<const Fe> b) {
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] + s * b[i];
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", add, sub, mul, add_scalar,
                                 mul_scalar, axpy};
  return table;
}

}  // namespace zkgraph::kernels
