#pragma once

#include <vector>

#include "indexlab/linalg.hpp"
#include "indexlab/matrix.hpp"

namespace indexlab::cstar {

// Finite direct sum of matrix algebras, given by its block sizes
// (k_1, ..., k_r).
struct Algebra {
  std::vector<int> blocks;

  Algebra() = default;
  explicit Algebra(std::vector<int> b);
  std::size_t block_count() const { return blocks.size(); }
  bool operator==(const Algebra& o) const { return blocks == o.blocks; }
};

// Element of M_m(A): one dense matrix of size m*k_i per block.
struct AMatrix {
  Algebra algebra;
  std::size_t amplification = 1;
  std::vector<ComplexMatrix> block;

  static AMatrix zero(const Algebra& a, std::size_t m);
  static AMatrix identity(const Algebra& a, std::size_t m);

  // max over blocks of ||p^2 - p|| and ||p - p*||
  double projection_defect() const;
  bool same_shape(const AMatrix& o) const;
};

// K0(A) = Z^r via per-block module ranks. Negative entries are formal
// differences.
struct K0Class {
  Algebra algebra;
  std::vector<long long> ranks;

  K0Class() = default;
  K0Class(Algebra a, std::vector<long long> r);

  K0Class operator+(const K0Class& o) const;
  K0Class operator-(const K0Class& o) const;
  bool operator==(const K0Class& o) const {
    return algebra == o.algebra && ranks == o.ranks;
  }
};

// Module rank of a projection block acting on (C^{k})^m: eigenvalues are
// counted above 1/2 and divided by the block size k. Eigenvalues falling
// inside [rank_tol, 1 - rank_tol] raise an "ambiguous projection" error, as
// does a count that is not a multiple of k.
long long rank_from_projection_spectrum(const std::vector<double>& eigenvalues,
                                        int k, double rank_tol);

K0Class k0_of_projection(const AMatrix& p, double rank_tol);

K0Class difference_class(const AMatrix& p, const AMatrix& q, double rank_tol);

AMatrix amplify(const AMatrix& x, std::size_t m_extra);

}  // namespace indexlab::cstar
