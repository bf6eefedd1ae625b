#pragma once

#include <vector>

#include "indexlab/matrix.hpp"

namespace indexlab::linalg::detail {

// Householder tridiagonalization data: real tridiagonal (d, e), the
// diagonal unitary making the subdiagonal real, and the reflectors left in
// the strict lower triangle of the reduced matrix.
struct Tridiag {
  std::size_t n = 0;
  std::vector<double> d;
  std::vector<double> e;
  std::vector<cplx> phases;
  std::vector<char> active;
};

Tridiag tridiagonalize(ComplexMatrix& a);

// y <- (H_0 ... H_{n-3}) P y, reflectors applied last-to-first.
void back_transform(const ComplexMatrix& house, const Tridiag& t,
                    ComplexMatrix& y);

}  // namespace indexlab::linalg::detail
