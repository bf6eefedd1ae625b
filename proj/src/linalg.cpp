#include "indexlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "indexlab/detail/eig_kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace indexlab::linalg {

namespace {

constexpr double kTiny = 1e-290;

double hypot2(double a, double b) { return std::hypot(a, b); }

// Implicit-shift QL on a real symmetric tridiagonal. If z != nullptr the
// rotations are accumulated into its columns (z must start as identity or
// any orthonormal set). Deterministic sweep order.
void tql(std::vector<double>& d, std::vector<double>& e, ComplexMatrix* z) {
  const std::size_t n = d.size();
  if (n == 0) return;
  std::vector<double> ee(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) ee[i] = e[i];

  // absolute deflation floor: couplings at rounding level relative to the
  // whole matrix are treated as zero (otherwise exactly-degenerate zero
  // blocks never meet a purely relative test)
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(d[i]));
  for (std::size_t i = 0; i + 1 < n; ++i)
    scale = std::max(scale, std::abs(ee[i]));
  const double floor_abs = 2.3e-16 * scale + 1e-300;

  for (std::size_t l = 0; l < n; ++l) {
    std::size_t iter = 0;
    while (true) {
      std::size_t m = l;
      for (; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(ee[m]) <= 2.3e-16 * dd + floor_abs) break;
      }
      if (m == l) break;
      require(++iter <= 60, ErrorCode::numerical_failure,
              "QL iteration failed to converge");
      double g = (d[l + 1] - d[l]) / (2.0 * ee[l]);
      double r = hypot2(g, 1.0);
      g = d[m] - d[l] + ee[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (std::size_t i1 = m; i1-- > l;) {
        const std::size_t i = i1;
        double f = s * ee[i];
        const double b = c * ee[i];
        r = hypot2(f, g);
        ee[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          ee[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (z) {
          ComplexMatrix& Z = *z;
          const std::size_t rows = Z.rows();
          for (std::size_t row = 0; row < rows; ++row) {
            const cplx zi1 = Z(row, i + 1);
            const cplx zi = Z(row, i);
            Z(row, i + 1) = s * zi + c * zi1;
            Z(row, i) = c * zi - s * zi1;
          }
        }
      }
      if (underflow) continue;
      d[l] -= p;
      ee[l] = g;
      ee[m] = 0.0;
    }
  }
}

void sort_pairs(std::vector<double>& vals, ComplexMatrix* vecs) {
  const std::size_t n = vals.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = vals[idx[j]];
  vals = std::move(sv);
  if (vecs) {
    ComplexMatrix out(vecs->rows(), n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < vecs->rows(); ++i)
        out(i, j) = (*vecs)(i, idx[j]);
    *vecs = std::move(out);
  }
}

ComplexMatrix symmetrized_copy(const ComplexMatrix& m) {
  require(m.square(), ErrorCode::invalid_argument,
          "hermitian eigensolver needs a square matrix");
  require(!m.empty(), ErrorCode::invalid_argument, "empty matrix");
  require(m.all_finite(), ErrorCode::invalid_argument,
          "matrix has non-finite entries");
  ComplexMatrix a = m;
  a.hermitize();
  return a;
}

// Inverse iteration on the tridiagonal (d, e) for one shifted eigenvalue.
std::vector<double> solve_tridiag_shifted(const std::vector<double>& d,
                                          const std::vector<double>& e,
                                          double lambda,
                                          std::vector<double>& b) {
  const std::size_t n = d.size();
  // LU with partial pivoting on [sub, diag, super, super2]
  std::vector<double> dl(n, 0.0), dd(n, 0.0), du(n, 0.0), du2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) dd[i] = d[i] - lambda;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dl[i] = e[i];
    du[i] = e[i];
  }
  std::vector<int> piv(n, 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i])) {
      if (std::abs(dd[i]) < kTiny) dd[i] = kTiny;
      const double m = dl[i] / dd[i];
      dd[i + 1] -= m * du[i];
      dl[i] = m;  // store multiplier
    } else {
      const double m = dd[i] / dl[i];
      std::swap(dd[i], dl[i]);
      const double tmp = du[i];
      du[i] = dd[i + 1];
      dd[i + 1] = tmp - m * dd[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -m * du[i + 1];
      }
      piv[i] = 1;
      dl[i] = m;
    }
  }
  if (std::abs(dd[n - 1]) < kTiny) dd[n - 1] = kTiny;
  // forward
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (piv[i]) std::swap(b[i], b[i + 1]);
    b[i + 1] -= dl[i] * b[i];
  }
  // back substitution
  std::vector<double> y(n, 0.0);
  y[n - 1] = b[n - 1] / dd[n - 1];
  if (n >= 2) {
    y[n - 2] = (b[n - 2] - du[n - 2] * y[n - 1]) / dd[n - 2];
    for (std::size_t i1 = n - 2; i1-- > 0;) {
      const std::size_t i = i1;
      double rhs = b[i] - du[i] * y[i + 1];
      if (i + 2 < n) rhs -= du2[i] * y[i + 2];
      y[i] = rhs / dd[i];
    }
  }
  return y;
}

}  // namespace

double SpectralData::reconstruction_residual(const ComplexMatrix& m) const {
  ComplexMatrix w = eigenvectors;
  for (std::size_t j = 0; j < w.cols(); ++j)
    for (std::size_t i = 0; i < w.rows(); ++i) w(i, j) *= eigenvalues[j];
  ComplexMatrix rec = matmul(w, eigenvectors.adjoint());
  rec -= m;
  return rec.frobenius();
}

double SpectralData::unitarity_residual() const {
  ComplexMatrix g = gram(eigenvectors);
  g -= ComplexMatrix::identity(g.rows());
  return g.frobenius();
}

SpectralData hermitian_eig(const ComplexMatrix& m) {
  ComplexMatrix a = symmetrized_copy(m);
  const std::size_t n = a.rows();
  detail::Tridiag t = detail::tridiagonalize(a);
  std::vector<double> d = t.d, e = t.e;
  ComplexMatrix z = ComplexMatrix::identity(n);
  tql(d, e, &z);
  detail::back_transform(a, t, z);
  sort_pairs(d, &z);
  SpectralData s;
  s.eigenvalues = std::move(d);
  s.eigenvectors = std::move(z);
  return s;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
  ComplexMatrix a = symmetrized_copy(m);
  detail::Tridiag t = detail::tridiagonalize(a);
  std::vector<double> d = t.d, e = t.e;
  tql(d, e, nullptr);
  std::sort(d.begin(), d.end());
  return d;
}

PartialEig hermitian_eig_in_window(const ComplexMatrix& m, double lo,
                                   double hi) {
  ComplexMatrix a = symmetrized_copy(m);
  const std::size_t n = a.rows();
  detail::Tridiag t = detail::tridiagonalize(a);
  std::vector<double> d = t.d, e = t.e;
  tql(d, e, nullptr);
  std::sort(d.begin(), d.end());

  PartialEig out;
  out.all_values = d;
  std::vector<double> sel;
  for (double v : d)
    if (v >= lo && v <= hi) sel.push_back(v);
  out.values = sel;
  if (sel.empty()) {
    out.vectors = ComplexMatrix(n, 0);
    return out;
  }

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(t.d[i]));
  for (std::size_t i = 0; i + 1 < n; ++i) scale = std::max(scale, std::abs(t.e[i]));
  scale = std::max(scale, 1e-30);
  const double cluster_tol = 1e-7 * scale;

  ComplexMatrix vecs(n, sel.size());
  Rng rng(0x517cc1b727220a95ull);
  std::vector<std::vector<double>> cluster_vecs;
  std::size_t cluster_start = 0;
  for (std::size_t j = 0; j < sel.size(); ++j) {
    if (j > 0 && sel[j] - sel[j - 1] > cluster_tol) {
      cluster_vecs.clear();
      cluster_start = j;
    }
    const double shift =
        sel[j] + (static_cast<double>(j - cluster_start)) * 1e-11 * scale;
    std::vector<double> y;
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
      std::vector<double> b(n);
      for (auto& x : b) x = rng.uniform(-1.0, 1.0);
      const double attempt_shift =
          shift + static_cast<double>(attempt) * 1e-10 * (scale + 1.0);
      y = solve_tridiag_shifted(t.d, t.e, attempt_shift, b);
      // overflow guard: a near-singular shift can blow the solution past
      // the representable range before normalization
      double amax = 0.0;
      bool finite = true;
      for (double v : y) {
        if (!(v < 1e300 && v > -1e300)) finite = false;
        amax = std::max(amax, std::abs(v));
      }
      if (!finite || amax == 0.0) continue;
      if (amax > 1e150)
        for (auto& v : y) v /= amax;
      for (int pass = 0; pass < 2; ++pass) {
        // orthogonalize against cluster members, then refine
        for (const auto& prev : cluster_vecs) {
          double dot = 0.0;
          for (std::size_t i = 0; i < n; ++i) dot += prev[i] * y[i];
          for (std::size_t i = 0; i < n; ++i) y[i] -= dot * prev[i];
        }
        double nrm = 0.0;
        for (double v : y) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-8) break;
        for (auto& v : y) v /= nrm;
        if (pass == 0) {
          std::vector<double> b2 = y;
          y = solve_tridiag_shifted(t.d, t.e, attempt_shift, b2);
          double am = 0.0;
          bool fin = true;
          for (double v : y) {
            if (!(v < 1e300 && v > -1e300)) fin = false;
            am = std::max(am, std::abs(v));
          }
          if (!fin || am == 0.0) break;
          if (am > 1e150)
            for (auto& v : y) v /= am;
        }
      }
      double nrm = 0.0;
      for (double v : y) nrm += v * v;
      nrm = std::sqrt(nrm);
      if (nrm > 1e-8) {
        for (auto& v : y) v /= nrm;
        ok = true;
      }
    }
    require(ok, ErrorCode::numerical_failure,
            "inverse iteration failed to produce an eigenvector");
    cluster_vecs.push_back(y);
    for (std::size_t i = 0; i < n; ++i) vecs(i, j) = y[i];
  }

  detail::back_transform(a, t, vecs);

  // final polish: modified Gram-Schmidt across the selected set
  for (std::size_t j = 0; j < vecs.cols(); ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      cplx dot = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        dot += std::conj(vecs(i, p)) * vecs(i, j);
      for (std::size_t i = 0; i < n; ++i) vecs(i, j) -= dot * vecs(i, p);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(vecs(i, j));
    nrm = std::sqrt(nrm);
    require(nrm > 1e-8, ErrorCode::numerical_failure,
            "degenerate cluster orthogonalization failed");
    for (std::size_t i = 0; i < n; ++i) vecs(i, j) /= nrm;
  }
  out.vectors = std::move(vecs);
  return out;
}

ComplexMatrix apply_function(const SpectralData& s,
                             const std::function<cplx(double)>& f) {
  const std::size_t n = s.eigenvalues.size();
  ComplexMatrix w = s.eigenvectors;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx fv = f(s.eigenvalues[j]);
    require(indexlab::detail::value_finite(fv),
            ErrorCode::invalid_argument,
            "function not defined at eigenvalue " +
                std::to_string(s.eigenvalues[j]));
    for (std::size_t i = 0; i < w.rows(); ++i) w(i, j) *= fv;
  }
  return matmul(w, s.eigenvectors.adjoint());
}

double operator_norm(const ComplexMatrix& m) {
  require(!m.empty(), ErrorCode::invalid_argument,
          "operator_norm of empty matrix");
  if (m.square() && m.hermiticity_defect() < 1e-12) {
    auto vals = hermitian_eigenvalues(m);
    double s = 0.0;
    for (double v : vals) s = std::max(s, std::abs(v));
    return s;
  }
  ComplexMatrix g = gram(m);
  auto vals = hermitian_eigenvalues(g);
  double top = vals.empty() ? 0.0 : vals.back();
  return std::sqrt(std::max(0.0, top));
}

std::vector<cplx> dft(const std::vector<cplx>& values, DftDirection dir) {
  const std::size_t n = values.size();
  require(n > 0, ErrorCode::invalid_argument, "dft of empty vector");
  require((n & (n - 1)) == 0, ErrorCode::invalid_argument,
          "dft length must be a power of two");
  std::vector<cplx> x = values;
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  const double sgn = (dir == DftDirection::forward) ? -1.0 : 1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sgn * 2.0 * kPi / static_cast<double>(len);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cplx u = x[i + j];
        const cplx v = x[i + j + len / 2] * w;
        x[i + j] = u + v;
        x[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : x) v *= scale;
  return x;
}

LuFactors lu_factor(const ComplexMatrix& m) {
  require(m.square() && !m.empty(), ErrorCode::invalid_argument,
          "lu_factor needs a nonempty square matrix");
  LuFactors f;
  f.lu = m;
  const std::size_t n = m.rows();
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(f.lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(f.lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    require(best > kTiny, ErrorCode::numerical_failure, "singular matrix in LU");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
    }
    const cplx inv = 1.0 / f.lu(k, k);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n - k > 256)
#endif
    for (long long ii = k + 1; ii < static_cast<long long>(n); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      const cplx mult = f.lu(i, k) * inv;
      f.lu(i, k) = mult;
      const cplx* krow = f.lu.row(k);
      cplx* irow = f.lu.row(i);
      for (std::size_t j = k + 1; j < n; ++j) irow[j] -= mult * krow[j];
    }
  }
  return f;
}

void LuFactors::solve_in_place(std::vector<cplx>& b) const {
  const std::size_t n = lu.rows();
  std::vector<cplx> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
  for (std::size_t i = 1; i < n; ++i) {
    cplx s = x[i];
    const cplx* row = lu.row(i);
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * x[j];
    x[i] = s;
  }
  for (std::size_t i1 = n; i1-- > 0;) {
    const std::size_t i = i1;
    cplx s = x[i];
    const cplx* row = lu.row(i);
    for (std::size_t j = i + 1; j < n; ++j) s -= row[j] * x[j];
    x[i] = s / row[i];
  }
  b = std::move(x);
}

ComplexMatrix lu_solve(const ComplexMatrix& m, const ComplexMatrix& rhs) {
  LuFactors f = lu_factor(m);
  const std::size_t n = m.rows();
  ComplexMatrix out(n, rhs.cols());
  std::vector<cplx> col(n);
  for (std::size_t j = 0; j < rhs.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = rhs(i, j);
    f.solve_in_place(col);
    for (std::size_t i = 0; i < n; ++i) out(i, j) = col[i];
  }
  return out;
}

ComplexMatrix lu_inverse(const ComplexMatrix& m) {
  return lu_solve(m, ComplexMatrix::identity(m.rows()));
}

ComplexMatrix orthogonal_complement(std::size_t n, const ComplexMatrix& cols) {
  const std::size_t k = cols.cols();
  require(cols.rows() == n && k <= n, ErrorCode::invalid_argument,
          "orthogonal_complement shape mismatch");
  if (k == 0) return ComplexMatrix::identity(n);
  // Householder QR of the input columns; the complement is Q applied to the
  // trailing standard basis vectors. O(n k^2 + n^2 k).
  ComplexMatrix r = cols;
  std::vector<std::vector<cplx>> reflectors;
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<cplx> v(n - j);
    double xnorm2 = 0.0;
    for (std::size_t i = j; i < n; ++i) {
      v[i - j] = r(i, j);
      xnorm2 += std::norm(v[i - j]);
    }
    const double xnorm = std::sqrt(xnorm2);
    require(xnorm > 1e-12, ErrorCode::invalid_argument,
            "orthogonal_complement: input columns are linearly dependent");
    cplx ph = v[0];
    const double a0 = std::abs(ph);
    ph = (a0 < 1e-300) ? cplx(1.0, 0.0) : ph / a0;
    v[0] += ph * xnorm;
    double unorm2 = 0.0;
    for (const auto& x : v) unorm2 += std::norm(x);
    const double unorm = std::sqrt(unorm2);
    require(unorm > 1e-300, ErrorCode::numerical_failure,
            "orthogonal_complement: degenerate reflector");
    for (auto& x : v) x /= unorm;
    // apply to the remaining columns of r
    for (std::size_t c = j; c < k; ++c) {
      cplx dot = 0.0;
      for (std::size_t i = j; i < n; ++i) dot += std::conj(v[i - j]) * r(i, c);
      dot *= 2.0;
      for (std::size_t i = j; i < n; ++i) r(i, c) -= dot * v[i - j];
    }
    reflectors.push_back(std::move(v));
  }
  ComplexMatrix out(n, n - k);
  std::vector<cplx> col(n);
  for (std::size_t p = 0; p < n - k; ++p) {
    std::fill(col.begin(), col.end(), cplx(0.0, 0.0));
    col[k + p] = 1.0;
    // col <- H_0 ... H_{k-1} e_{k+p}
    for (std::size_t j1 = k; j1-- > 0;) {
      const auto& v = reflectors[j1];
      cplx dot = 0.0;
      for (std::size_t i = j1; i < n; ++i) dot += std::conj(v[i - j1]) * col[i];
      dot *= 2.0;
      for (std::size_t i = j1; i < n; ++i) col[i] -= dot * v[i - j1];
    }
    for (std::size_t i = 0; i < n; ++i) out(i, p) = col[i];
  }
  return out;
}

}  // namespace indexlab::linalg
