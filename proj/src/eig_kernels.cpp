#include "indexlab/detail/eig_kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

// Hot O(n^3) reduction kernels, compiled with -ffast-math. No IEEE
// classification may live here.

namespace indexlab::linalg::detail {

namespace {
constexpr double kTiny = 1e-290;
}

// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
// form. On return `a` holds the Householder vectors in its strict lower
// triangle (column k holds v_k in rows k+1..n-1); `phases` is the diagonal
// unitary that makes the subdiagonal real nonnegative.

Tridiag tridiagonalize(ComplexMatrix& a) {
  const std::size_t n = a.rows();
  Tridiag t;
  t.n = n;
  t.d.assign(n, 0.0);
  t.e.assign(n > 0 ? n - 1 : 0, 0.0);
  t.phases.assign(n, cplx(1.0, 0.0));
  t.active.assign(n, 0);
  if (n == 0) return t;
  std::vector<cplx> ec(n > 1 ? n - 1 : 0, cplx(0.0, 0.0));
  std::vector<cplx> v(n), w(n), w1(n);

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;  // length of the column below diagonal
    double xnorm2 = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      v[r] = a(k + 1 + r, k);
      xnorm2 += std::norm(v[r]);
    }
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm < kTiny) {
      ec[k] = 0.0;
      continue;
    }
    cplx ph = v[0];
    const double a0 = std::abs(ph);
    ph = (a0 < kTiny) ? cplx(1.0, 0.0) : ph / a0;
    const cplx alpha = -ph * xnorm;
    v[0] -= alpha;
    double unorm2 = 0.0;
    for (std::size_t r = 0; r < m; ++r) unorm2 += std::norm(v[r]);
    const double unorm = std::sqrt(unorm2);
    if (unorm < kTiny) {
      ec[k] = alpha;
      continue;
    }
    const double inv = 1.0 / unorm;
    for (std::size_t r = 0; r < m; ++r) v[r] *= inv;

    // w1 = A2 v on the trailing block
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m > 128)
#endif
    for (long long rr = 0; rr < static_cast<long long>(m); ++rr) {
      const std::size_t r = static_cast<std::size_t>(rr);
      const cplx* row = a.row(k + 1 + r) + (k + 1);
      cplx s = 0.0;
      for (std::size_t c = 0; c < m; ++c) s += row[c] * v[c];
      w1[r] = s;
    }
    cplx mu = 0.0;
    for (std::size_t r = 0; r < m; ++r) mu += std::conj(v[r]) * w1[r];
    for (std::size_t r = 0; r < m; ++r) w[r] = 2.0 * (w1[r] - mu * v[r]);

    // A2 -= v w* + w v*
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m > 128)
#endif
    for (long long rr = 0; rr < static_cast<long long>(m); ++rr) {
      const std::size_t r = static_cast<std::size_t>(rr);
      cplx* row = a.row(k + 1 + r) + (k + 1);
      const cplx vr = v[r], wr = w[r];
      for (std::size_t c = 0; c < m; ++c)
        row[c] -= vr * std::conj(w[c]) + wr * std::conj(v[c]);
    }

    ec[k] = alpha;
    t.active[k] = 1;
    for (std::size_t r = 0; r < m; ++r) a(k + 1 + r, k) = v[r];
  }
  if (n >= 2) ec[n - 2] = a(n - 1, n - 2);

  for (std::size_t i = 0; i < n; ++i) t.d[i] = a(i, i).real();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double ab = std::abs(ec[k]);
    t.e[k] = ab;
    const cplx ph = (ab < kTiny) ? cplx(1.0, 0.0) : ec[k] / ab;
    t.phases[k + 1] = t.phases[k] * ph;
  }
  return t;
}


// Back-transform vectors of the tridiagonal form to vectors of the original
// matrix: y <- (H_0 ... H_{n-3}) P y, reflectors applied last-to-first.
void back_transform(const ComplexMatrix& house, const Tridiag& t,
                    ComplexMatrix& y) {
  const std::size_t n = t.n;
  const std::size_t ncol = y.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const cplx p = t.phases[i];
    for (std::size_t j = 0; j < ncol; ++j) y(i, j) *= p;
  }
  std::vector<cplx> acc(ncol);
  for (std::size_t k1 = n >= 2 ? n - 2 : 0; k1-- > 0;) {
    const std::size_t k = k1;
    if (!t.active[k]) continue;
    const std::size_t m = n - k - 1;
    std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
      const cplx vc = std::conj(house(k + 1 + r, k));
      const cplx* row = y.row(k + 1 + r);
      for (std::size_t j = 0; j < ncol; ++j) acc[j] += vc * row[j];
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m > 256 && ncol > 8)
#endif
    for (long long rr = 0; rr < static_cast<long long>(m); ++rr) {
      const std::size_t r = static_cast<std::size_t>(rr);
      const cplx v2 = 2.0 * house(k + 1 + r, k);
      cplx* row = y.row(k + 1 + r);
      for (std::size_t j = 0; j < ncol; ++j) row[j] -= v2 * acc[j];
    }
  }
}


}  // namespace indexlab::linalg::detail
