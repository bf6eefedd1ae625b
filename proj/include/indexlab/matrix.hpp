#pragma once

#include <cstddef>
#include <vector>

#include "indexlab/common.hpp"

namespace indexlab {

namespace detail {
bool entries_finite(const cplx* p, std::size_t n);
bool value_finite(cplx v);
}  // namespace detail

// Dense complex matrix, row-major. The workhorse value type of the whole
// library; everything downstream (oscillator operators, quantizations,
// Cayley transforms) is one of these.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, cplx(0.0, 0.0)) {}

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(const std::vector<cplx>& d);
  static ComplexMatrix diagonal(const std::vector<double>& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  bool square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }
  cplx* row(std::size_t i) { return a_.data() + i * cols_; }
  const cplx* row(std::size_t i) const { return a_.data() + i * cols_; }
  cplx* data() { return a_.data(); }
  const cplx* data() const { return a_.data(); }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conj() const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) {
    a += b;
    return a;
  }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) {
    a -= b;
    return a;
  }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) {
    a *= s;
    return a;
  }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) {
    a *= s;
    return a;
  }

  double frobenius() const;
  double max_abs() const;
  bool all_finite() const;

  // ||M - M*|| / max(||M||, tiny), Frobenius flavor; gate for the Hermitian flag.
  double hermiticity_defect() const;
  void hermitize();  // M <- (M + M*)/2

  std::vector<cplx> apply(const std::vector<cplx>& x) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> a_;
};

// C = A * B, cache-blocked, OpenMP over row blocks. Deterministic: each
// output entry is accumulated in a fixed order independent of thread count.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

// C = A* * A (Gram), exploiting Hermitian symmetry of the result.
ComplexMatrix gram(const ComplexMatrix& a);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

std::vector<cplx> matvec(const ComplexMatrix& a, const std::vector<cplx>& x);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace indexlab
