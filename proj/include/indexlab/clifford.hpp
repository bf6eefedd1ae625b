#pragma once

#include <vector>

#include "indexlab/matrix.hpp"

namespace indexlab::clifford {

// The 2^n-dimensional representation of the complexified exterior algebra
// of R^n. Basis: subsets of {1..n} in graded-lexicographic order (sorted by
// cardinality, then numerically as bitmasks). All generator entries are
// exact integers.
struct CliffordRep {
  int n = 0;
  std::vector<unsigned> basis;       // bitmasks in graded-lex order
  std::vector<ComplexMatrix> d;      // exterior multiplication by e_j, j=0..n-1
  std::vector<ComplexMatrix> dstar;  // adjoints (constructed, not computed)
  ComplexMatrix epsilon;             // +1 on even forms, -1 on odd forms

  std::size_t dim() const { return basis.size(); }
  std::vector<double> epsilon_signs() const;
};

// 1 <= n <= 6.
CliffordRep build_clifford(int n);

// c(v, xi) = sum_j v_j (d_j + d_j^*) + i * sum_j xi_j (d_j - d_j^*).
// Self-adjoint, anticommutes with epsilon, squares to (|v|^2 + |xi|^2) I.
ComplexMatrix clifford_c(const CliffordRep& rep, const std::vector<double>& v,
                         const std::vector<double>& xi);

}  // namespace indexlab::clifford
