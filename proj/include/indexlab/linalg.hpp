#pragma once

#include <functional>
#include <vector>

#include "indexlab/matrix.hpp"

namespace indexlab::linalg {

// Eigenvalues ascending plus an orthonormal eigenbasis (columns of V).
// Contract: ||V L V* - M|| <= eig_reconstruct * (1 + ||M||) and
// ||V*V - I|| <= unitary.
struct SpectralData {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;

  double reconstruction_residual(const ComplexMatrix& m) const;
  double unitarity_residual() const;
};

// Householder tridiagonalization + implicit-shift QL, in-repo and
// deterministic (fixed sweep order, no randomized pivoting). Symmetrizes
// its input as (M + M*)/2 before reducing.
SpectralData hermitian_eig(const ComplexMatrix& m);

// Eigenvalues only (skips accumulating the transform); same reduction path.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

// Eigenpairs for the eigenvalues of the symmetrized input lying in
// [lo, hi]: values-only QL to locate them, tridiagonal inverse iteration
// with in-cluster reorthogonalization for the vectors. Columns of the
// returned matrix are the eigenvectors, paired with `values`.
struct PartialEig {
  std::vector<double> values;        // selected eigenvalues, ascending
  ComplexMatrix vectors;             // n x k
  std::vector<double> all_values;    // full spectrum, ascending
};
PartialEig hermitian_eig_in_window(const ComplexMatrix& m, double lo, double hi);

// V f(L) V*. Throws if f produces a non-finite value at an eigenvalue.
ComplexMatrix apply_function(const SpectralData& s,
                             const std::function<cplx(double)>& f);

// Largest singular value. Hermitian inputs take the cheap |eig| route,
// general inputs go through the Gram matrix. Relative accuracy ~1e-8.
double operator_norm(const ComplexMatrix& m);

enum class DftDirection { forward, inverse };

// Unitary radix-2 FFT; length must be a power of two.
std::vector<cplx> dft(const std::vector<cplx>& values, DftDirection dir);

// LU with partial pivoting.
struct LuFactors {
  ComplexMatrix lu;
  std::vector<std::size_t> perm;
  void solve_in_place(std::vector<cplx>& b) const;
};
LuFactors lu_factor(const ComplexMatrix& m);
ComplexMatrix lu_inverse(const ComplexMatrix& m);
ComplexMatrix lu_solve(const ComplexMatrix& m, const ComplexMatrix& rhs);

// Orthonormal basis of the orthogonal complement of span(cols), within
// C^n; returns an n x (n - k) isometry. Used to split off artifact
// directions when compressing operators.
ComplexMatrix orthogonal_complement(std::size_t n, const ComplexMatrix& cols);

}  // namespace indexlab::linalg
