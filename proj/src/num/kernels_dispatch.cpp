#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"

namespace paretofact::num::kernels {

namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("PARETOFACT_ISA")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return detected_isa();
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
#if defined(__x86_64__) || defined(_M_X64)
  static const bool has_avx2 = avx2::compiled() && __builtin_cpu_supports("avx2") &&
                               __builtin_cpu_supports("fma");
  return has_avx2 ? Isa::avx2 : Isa::scalar;
#else
  return Isa::scalar;
#endif
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  active_slot().store(isa, std::memory_order_relaxed);
}

template <typename T>
const Table<T>& table(Isa isa) {
  return isa == Isa::avx2 ? avx2::table<T>() : scalar::table<T>();
}

template const Table<float>& table<float>(Isa);
template const Table<double>& table<double>(Isa);

}  // namespace paretofact::num::kernels
