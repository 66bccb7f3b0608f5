#pragma once

#include "paretofact/num/kernels.hpp"

namespace paretofact::num::kernels {

namespace scalar {
template <typename T>
const Table<T>& table();
}

namespace avx2 {
// Defined only when the build targets x86-64.
bool compiled();
template <typename T>
const Table<T>& table();
}  // namespace avx2

}  // namespace paretofact::num::kernels
