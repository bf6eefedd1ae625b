#include "indexlab/fredholm.hpp"

#include <algorithm>
#include <cmath>

namespace indexlab::fredholm {

namespace {

// Orthonormal basis of the given sector component of the span of `vecs`.
ComplexMatrix sector_basis(const ComplexMatrix& vecs,
                           const std::vector<double>& eps_signs, double sign) {
  const std::size_t n = vecs.rows(), q = vecs.cols();
  ComplexMatrix comp(n, q);
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t i = 0; i < n; ++i)
      comp(i, j) = (eps_signs[i] == sign) ? vecs(i, j) : cplx(0.0, 0.0);
  if (q == 0) return ComplexMatrix(n, 0);
  // SVD via the small Gram matrix
  ComplexMatrix g = gram(comp);
  auto s = linalg::hermitian_eig(g);
  std::size_t keep = 0;
  for (double v : s.eigenvalues)
    if (v > 1e-12) ++keep;
  ComplexMatrix basis(n, keep);
  std::size_t col = 0;
  for (std::size_t j = 0; j < q; ++j) {
    if (s.eigenvalues[j] <= 1e-12) continue;
    const double inv = 1.0 / std::sqrt(s.eigenvalues[j]);
    for (std::size_t p = 0; p < q; ++p) {
      const cplx w = s.eigenvectors(p, j) * inv;
      if (w == cplx(0.0, 0.0)) continue;
      for (std::size_t i = 0; i < n; ++i) basis(i, col) += comp(i, p) * w;
    }
    ++col;
  }
  return basis;
}

SectorModes classify_sector(const ComplexMatrix& basis, const DefectForm& defect,
                            double lo, double hi) {
  SectorModes out;
  const std::size_t n = basis.rows(), q = basis.cols();
  if (q == 0) {
    out.physical_vectors = ComplexMatrix(n, 0);
    out.artifact_vectors = ComplexMatrix(n, 0);
    return out;
  }
  // defect form in this basis
  std::vector<std::vector<cplx>> qcols(q);
  for (std::size_t j = 0; j < q; ++j) {
    std::vector<cplx> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = basis(i, j);
    qcols[j] = defect(u);
  }
  ComplexMatrix r(q, q);
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = 0; b < q; ++b) {
      cplx acc(0.0, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        acc += std::conj(basis(i, a)) * qcols[b][i];
      r(a, b) = acc;
    }
  auto rs = linalg::hermitian_eig(r);
  std::vector<std::size_t> phys, arti;
  for (std::size_t j = 0; j < q; ++j) {
    const double score = rs.eigenvalues[j];
    out.defect_scores.push_back(score);
    if (score < lo)
      phys.push_back(j);
    else if (score > hi)
      arti.push_back(j);
    else
      fail(ErrorCode::numerical_failure,
           "near-zero mode classification is ambiguous (defect score " +
               std::to_string(score) + ")");
  }
  auto collect = [&](const std::vector<std::size_t>& idx) {
    ComplexMatrix m(n, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c)
      for (std::size_t p = 0; p < q; ++p) {
        const cplx w = rs.eigenvectors(p, idx[c]);
        if (w == cplx(0.0, 0.0)) continue;
        for (std::size_t i = 0; i < n; ++i) m(i, c) += basis(i, p) * w;
      }
    return m;
  };
  out.physical = static_cast<long long>(phys.size());
  out.artifact = static_cast<long long>(arti.size());
  out.physical_vectors = collect(phys);
  out.artifact_vectors = collect(arti);
  return out;
}

}  // namespace

NearZeroAnalysis analyze_near_zero(const ComplexMatrix& op,
                                   const std::vector<double>& eps_signs,
                                   const DefectForm& defect, double gap,
                                   double window_frac, double artifact_lo,
                                   double artifact_hi) {
  require(gap > 0.0 && window_frac > 0.0 && window_frac < 1.0,
          ErrorCode::invalid_argument, "bad gap/window for near-zero analysis");
  NearZeroAnalysis out;
  out.gap_used = gap;
  out.window = window_frac * gap;
  auto pe = linalg::hermitian_eig_in_window(op, -out.window, out.window);
  out.window_values = pe.values;
  out.all_values = pe.all_values;
  out.plus = classify_sector(sector_basis(pe.vectors, eps_signs, 1.0), defect,
                             artifact_lo, artifact_hi);
  out.minus = classify_sector(sector_basis(pe.vectors, eps_signs, -1.0), defect,
                              artifact_lo, artifact_hi);
  return out;
}

Reduction compress_artifacts(const ComplexMatrix& op,
                             const std::vector<double>& eps_signs,
                             const NearZeroAnalysis& analysis) {
  const std::size_t n = op.rows();
  const std::size_t a_plus = analysis.plus.artifact_vectors.cols();
  const std::size_t a_minus = analysis.minus.artifact_vectors.cols();
  Reduction red;
  if (a_plus + a_minus == 0) {
    red.op = op;
    red.eps_signs = eps_signs;
    red.iso = ComplexMatrix::identity(n);
    return red;
  }
  // complement per sector keeps the grading diagonal
  std::vector<std::size_t> plus_idx, minus_idx;
  for (std::size_t i = 0; i < n; ++i)
    (eps_signs[i] > 0 ? plus_idx : minus_idx).push_back(i);

  auto sector_complement = [&](const std::vector<std::size_t>& idx,
                               const ComplexMatrix& artifacts) {
    const std::size_t ns = idx.size();
    ComplexMatrix restricted(ns, artifacts.cols());
    for (std::size_t j = 0; j < artifacts.cols(); ++j)
      for (std::size_t i = 0; i < ns; ++i)
        restricted(i, j) = artifacts(idx[i], j);
    return linalg::orthogonal_complement(ns, restricted);
  };
  ComplexMatrix cp = sector_complement(plus_idx, analysis.plus.artifact_vectors);
  ComplexMatrix cm =
      sector_complement(minus_idx, analysis.minus.artifact_vectors);

  const std::size_t kept = cp.cols() + cm.cols();
  red.iso = ComplexMatrix(n, kept);
  red.eps_signs.assign(kept, 0.0);
  for (std::size_t j = 0; j < cp.cols(); ++j) {
    for (std::size_t i = 0; i < plus_idx.size(); ++i)
      red.iso(plus_idx[i], j) = cp(i, j);
    red.eps_signs[j] = 1.0;
  }
  for (std::size_t j = 0; j < cm.cols(); ++j) {
    for (std::size_t i = 0; i < minus_idx.size(); ++i)
      red.iso(minus_idx[i], cp.cols() + j) = cm(i, j);
    red.eps_signs[cp.cols() + j] = -1.0;
  }
  red.op = matmul(red.iso.adjoint(), matmul(op, red.iso));
  red.op.hermitize();
  return red;
}

std::vector<double> physical_spectrum(const ComplexMatrix& op,
                                      const NearZeroAnalysis& analysis) {
  std::vector<double> out;
  for (double v : analysis.all_values)
    if (std::abs(v) > analysis.window) out.push_back(v);
  auto rayleigh = [&](const ComplexMatrix& vecs) {
    for (std::size_t j = 0; j < vecs.cols(); ++j) {
      std::vector<cplx> u(op.rows());
      for (std::size_t i = 0; i < op.rows(); ++i) u[i] = vecs(i, j);
      auto au = matvec(op, u);
      cplx acc(0.0, 0.0);
      for (std::size_t i = 0; i < op.rows(); ++i)
        acc += std::conj(u[i]) * au[i];
      out.push_back(acc.real());
    }
  };
  rayleigh(analysis.plus.physical_vectors);
  rayleigh(analysis.minus.physical_vectors);
  std::sort(out.begin(), out.end());
  return out;
}

DefectForm line_defect_form(int n, std::size_t N, double L, std::size_t fiber,
                            double boundary_frac) {
  return [n, N, L, fiber, boundary_frac](const std::vector<cplx>& v) {
    const std::size_t pts = (n == 1) ? N : N * N;
    require(v.size() == pts * fiber, ErrorCode::invalid_argument,
            "defect form dimension mismatch");
    std::vector<cplx> out(v.size(), cplx(0.0, 0.0));
    const double dx = 2.0 * L / static_cast<double>(N);
    auto coord = [&](std::size_t j) { return -L + dx * static_cast<double>(j); };
    // boundary-seam mass
    for (std::size_t g = 0; g < pts; ++g) {
      double xin = (n == 1) ? std::abs(coord(g))
                            : std::max(std::abs(coord(g / N)),
                                       std::abs(coord(g % N)));
      if (xin > boundary_frac * L)
        for (std::size_t s = 0; s < fiber; ++s)
          out[g * fiber + s] += v[g * fiber + s];
    }
    // top-quarter frequency mass, computed through the dense DFT sums so
    // that any even N is accepted
    const std::size_t half = N / 2;
    auto kmag = [&](std::size_t k) {
      const long long kk = static_cast<long long>(k);
      return static_cast<double>(
          std::abs(kk < static_cast<long long>(half)
                       ? kk
                       : kk - static_cast<long long>(N)));
    };
    // 1-d DFT along each axis per fiber component
    std::vector<cplx> hat(v.size(), cplx(0.0, 0.0));
    if (n == 1) {
      for (std::size_t s = 0; s < fiber; ++s)
        for (std::size_t k = 0; k < N; ++k) {
          cplx acc(0.0, 0.0);
          for (std::size_t j = 0; j < N; ++j) {
            const double ph = -2.0 * kPi * static_cast<double>(k * j) /
                              static_cast<double>(N);
            acc += v[j * fiber + s] * cplx(std::cos(ph), std::sin(ph));
          }
          hat[k * fiber + s] = acc / std::sqrt(static_cast<double>(N));
        }
      for (std::size_t s = 0; s < fiber; ++s)
        for (std::size_t k = 0; k < N; ++k)
          if (kmag(k) <= static_cast<double>(N) / 4.0) hat[k * fiber + s] = 0.0;
      // back-transform the masked part and add
      for (std::size_t s = 0; s < fiber; ++s)
        for (std::size_t j = 0; j < N; ++j) {
          cplx acc(0.0, 0.0);
          for (std::size_t k = 0; k < N; ++k) {
            const double ph = 2.0 * kPi * static_cast<double>(k * j) /
                              static_cast<double>(N);
            acc += hat[k * fiber + s] * cplx(std::cos(ph), std::sin(ph));
          }
          out[j * fiber + s] += acc / std::sqrt(static_cast<double>(N));
        }
    } else {
      auto hi2 = fourier_defect_form(n, N, fiber);
      auto h = hi2(v);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += h[i];
    }
    return out;
  };
}

DefectForm fourier_defect_form(int n, std::size_t N, std::size_t fiber) {
  return [n, N, fiber](const std::vector<cplx>& v) {
    const std::size_t pts = (n == 1) ? N : N * N;
    require(v.size() == pts * fiber, ErrorCode::invalid_argument,
            "defect form dimension mismatch");
    const std::size_t half = N / 2;
    auto kmag = [&](std::size_t k) {
      const long long kk = static_cast<long long>(k);
      return static_cast<double>(
          std::abs(kk < static_cast<long long>(half)
                       ? kk
                       : kk - static_cast<long long>(N)));
    };
    const double cut = static_cast<double>(N) / 4.0;
    // dense DFT (handles N = 24 etc.); project onto |k|_inf > N/4
    std::vector<cplx> out(v.size());
    const double invsq = 1.0 / std::sqrt(static_cast<double>(pts));
    std::vector<cplx> hat(v.size(), cplx(0.0, 0.0));
    auto phase = [&](std::size_t k, std::size_t j) {
      const double ph =
          -2.0 * kPi * static_cast<double>(k * j) / static_cast<double>(N);
      return cplx(std::cos(ph), std::sin(ph));
    };
    if (n == 1) {
      for (std::size_t s = 0; s < fiber; ++s)
        for (std::size_t k = 0; k < N; ++k) {
          cplx acc(0.0, 0.0);
          for (std::size_t j = 0; j < N; ++j) acc += v[j * fiber + s] * phase(k, j);
          hat[k * fiber + s] = (kmag(k) > cut) ? acc * invsq : cplx(0.0, 0.0);
        }
      for (std::size_t s = 0; s < fiber; ++s)
        for (std::size_t j = 0; j < N; ++j) {
          cplx acc(0.0, 0.0);
          for (std::size_t k = 0; k < N; ++k)
            acc += hat[k * fiber + s] * std::conj(phase(k, j));
          out[j * fiber + s] = acc * invsq;
        }
    } else {
      // separable 2-d transform
      std::vector<cplx> tmp(v.size(), cplx(0.0, 0.0));
      for (std::size_t s = 0; s < fiber; ++s) {
        // axis 1 (minor)
        for (std::size_t j0 = 0; j0 < N; ++j0)
          for (std::size_t k1 = 0; k1 < N; ++k1) {
            cplx acc(0.0, 0.0);
            for (std::size_t j1 = 0; j1 < N; ++j1)
              acc += v[(j0 * N + j1) * fiber + s] * phase(k1, j1);
            tmp[(j0 * N + k1) * fiber + s] = acc;
          }
        // axis 0 (major)
        for (std::size_t k1 = 0; k1 < N; ++k1)
          for (std::size_t k0 = 0; k0 < N; ++k0) {
            cplx acc(0.0, 0.0);
            for (std::size_t j0 = 0; j0 < N; ++j0)
              acc += tmp[(j0 * N + k1) * fiber + s] * phase(k0, j0);
            const bool keep = std::max(kmag(k0), kmag(k1)) > cut;
            hat[(k0 * N + k1) * fiber + s] =
                keep ? acc / static_cast<double>(N) : cplx(0.0, 0.0);
          }
        // inverse
        for (std::size_t k0 = 0; k0 < N; ++k0)
          for (std::size_t j1 = 0; j1 < N; ++j1) {
            cplx acc(0.0, 0.0);
            for (std::size_t k1 = 0; k1 < N; ++k1)
              acc += hat[(k0 * N + k1) * fiber + s] * std::conj(phase(k1, j1));
            tmp[(k0 * N + j1) * fiber + s] = acc;
          }
        for (std::size_t j0 = 0; j0 < N; ++j0)
          for (std::size_t j1 = 0; j1 < N; ++j1) {
            cplx acc(0.0, 0.0);
            for (std::size_t k0 = 0; k0 < N; ++k0)
              acc += tmp[(k0 * N + j1) * fiber + s] * std::conj(phase(k0, j0));
            out[(j0 * N + j1) * fiber + s] = acc / static_cast<double>(N);
          }
      }
    }
    return out;
  };
}

}  // namespace indexlab::fredholm
