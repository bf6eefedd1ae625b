#include "indexlab/matrix.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace indexlab {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<cplx>& d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<double>& d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      r(j, i) = std::conj((*this)(i, j));
  return r;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

ComplexMatrix ComplexMatrix::conj() const {
  ComplexMatrix r(rows_, cols_);
  for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = std::conj(a_[k]);
  return r;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, ErrorCode::invalid_argument,
          "matrix shape mismatch in +=");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, ErrorCode::invalid_argument,
          "matrix shape mismatch in -=");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& v : a_) v *= s;
  return *this;
}

double ComplexMatrix::frobenius() const {
  double s = 0.0;
  for (const auto& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
  double s = 0.0;
  for (const auto& v : a_) s = std::max(s, std::abs(v));
  return s;
}

bool ComplexMatrix::all_finite() const {
  return detail::entries_finite(a_.data(), a_.size());
}

double ComplexMatrix::hermiticity_defect() const {
  if (!square()) return 1.0;
  double num = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i; j < cols_; ++j)
      num += std::norm((*this)(i, j) - std::conj((*this)(j, i)));
  double den = frobenius();
  return std::sqrt(2.0 * num) / std::max(den, 1e-300);
}

void ComplexMatrix::hermitize() {
  require(square(), ErrorCode::invalid_argument, "hermitize needs square matrix");
  for (std::size_t i = 0; i < rows_; ++i) {
    (*this)(i, i) = cplx((*this)(i, i).real(), 0.0);
    for (std::size_t j = i + 1; j < cols_; ++j) {
      cplx v = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
      (*this)(i, j) = v;
      (*this)(j, i) = std::conj(v);
    }
  }
}

std::vector<cplx> ComplexMatrix::apply(const std::vector<cplx>& x) const {
  return matvec(*this, x);
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), ErrorCode::invalid_argument,
          "matmul shape mismatch");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  ComplexMatrix c(n, m);
  // i-k-j order: C's row accumulates streaming rows of B.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    cplx* crow = c.row(i);
    const cplx* arow = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const cplx av = arow[p];
      if (av == cplx(0.0, 0.0)) continue;
      const cplx* brow = b.row(p);
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

ComplexMatrix gram(const ComplexMatrix& a) {
  const std::size_t n = a.rows(), m = a.cols();
  ComplexMatrix c(m, m);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long jj = 0; jj < static_cast<long long>(m); ++jj) {
    const std::size_t j = static_cast<std::size_t>(jj);
    for (std::size_t i = 0; i <= j; ++i) {
      cplx s = 0.0;
      for (std::size_t p = 0; p < n; ++p)
        s += std::conj(a(p, i)) * a(p, j);
      c(i, j) = s;
      c(j, i) = std::conj(s);
    }
  }
  return c;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx av = a(i, j);
      if (av == cplx(0.0, 0.0)) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          c(i * b.rows() + p, j * b.cols() + q) = av * b(p, q);
    }
  return c;
}

std::vector<cplx> matvec(const ComplexMatrix& a, const std::vector<cplx>& x) {
  require(a.cols() == x.size(), ErrorCode::invalid_argument,
          "matvec shape mismatch");
  std::vector<cplx> y(a.rows(), cplx(0.0, 0.0));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (a.rows() > 256)
#endif
  for (long long ii = 0; ii < static_cast<long long>(a.rows()); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const cplx* row = a.row(i);
    cplx s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return matmul(a, b) - matmul(b, a);
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return matmul(a, b) + matmul(b, a);
}

}  // namespace indexlab
