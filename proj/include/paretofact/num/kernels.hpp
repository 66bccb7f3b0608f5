#pragma once

// Data-parallel inner loops behind the tensor ops. Every kernel has a scalar
// reference version and, on x86-64, an AVX2+FMA version chosen at runtime.
// The scalar table is the reference the SIMD table is tested against.

#include <cstddef>
#include <string_view>

namespace paretofact::num::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// Highest ISA supported by this CPU and build.
Isa detected_isa();

// ISA used by the dispatching entry points. Defaults to detected_isa(),
// unless PARETOFACT_ISA=scalar is set in the environment.
Isa active_isa();

// Overrides the active ISA (tests and benchmarks). Falls back to scalar when
// the requested ISA is unavailable. Not thread-safe against running kernels.
void set_active_isa(Isa isa);

template <typename T>
struct Table {
  // c[m x n] = a[m x k] * b[k x n]
  void (*gemm)(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n);
  // out[k x n] += a[m x k]^T * g[m x n]
  void (*gemm_tn_acc)(const T* a, const T* g, T* out, std::size_t m, std::size_t k, std::size_t n);
  // out[m x k] += g[m x n] * b[k x n]^T
  void (*gemm_nt_acc)(const T* g, const T* b, T* out, std::size_t m, std::size_t k, std::size_t n);
  // y += alpha * x
  void (*axpy)(T alpha, const T* x, T* y, std::size_t n);
  // sum_i |x_i - y_i|, accumulated in double
  double (*abs_diff_sum)(const T* x, const T* y, std::size_t n);
};

template <typename T>
const Table<T>& table(Isa isa);

template <typename T>
const Table<T>& active() {
  return table<T>(active_isa());
}

}  // namespace paretofact::num::kernels
