// IEEE classification lives in its own translation unit: the numerical
// kernels are compiled with -ffast-math, which would constant-fold
// std::isfinite away. This file must stay on strict FP semantics.
#include <cmath>
#include <cstddef>

#include "indexlab/common.hpp"

namespace indexlab::detail {

bool entries_finite(const cplx* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(p[i].real()) || !std::isfinite(p[i].imag())) return false;
  return true;
}

bool value_finite(cplx v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

}  // namespace indexlab::detail
