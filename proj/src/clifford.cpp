#include "indexlab/clifford.hpp"

#include <algorithm>
#include <bit>

namespace indexlab::clifford {

std::vector<double> CliffordRep::epsilon_signs() const {
  std::vector<double> s(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    s[i] = (std::popcount(basis[i]) % 2 == 0) ? 1.0 : -1.0;
  return s;
}

CliffordRep build_clifford(int n) {
  require(n >= 1 && n <= 6, ErrorCode::invalid_argument,
          "clifford dimension must satisfy 1 <= n <= 6");
  CliffordRep rep;
  rep.n = n;
  const std::size_t dim = std::size_t{1} << n;
  rep.basis.resize(dim);
  for (unsigned m = 0; m < dim; ++m) rep.basis[m] = m;
  std::stable_sort(rep.basis.begin(), rep.basis.end(), [](unsigned a, unsigned b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  std::vector<std::size_t> pos(dim);
  for (std::size_t i = 0; i < dim; ++i) pos[rep.basis[i]] = i;

  rep.d.assign(n, ComplexMatrix(dim, dim));
  rep.dstar.assign(n, ComplexMatrix(dim, dim));
  for (int j = 0; j < n; ++j) {
    const unsigned bit = 1u << j;
    for (std::size_t col = 0; col < dim; ++col) {
      const unsigned s = rep.basis[col];
      if (s & bit) continue;
      // e_j wedge e_S picks up a sign for each generator of S below j
      const int below = std::popcount(s & (bit - 1u));
      const double sign = (below % 2 == 0) ? 1.0 : -1.0;
      rep.d[j](pos[s | bit], col) = sign;
    }
    rep.dstar[j] = rep.d[j].adjoint();
  }

  rep.epsilon = ComplexMatrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    rep.epsilon(i, i) = (std::popcount(rep.basis[i]) % 2 == 0) ? 1.0 : -1.0;
  return rep;
}

ComplexMatrix clifford_c(const CliffordRep& rep, const std::vector<double>& v,
                         const std::vector<double>& xi) {
  require(v.size() == static_cast<std::size_t>(rep.n) && xi.size() == v.size(),
          ErrorCode::invalid_argument, "clifford_c: vector length mismatch");
  const std::size_t dim = rep.dim();
  ComplexMatrix c(dim, dim);
  for (int j = 0; j < rep.n; ++j) {
    const cplx vj(v[j], 0.0);
    const cplx xj(0.0, xi[j]);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t s = 0; s < dim; ++s) {
        const cplx dv = rep.d[j](r, s);
        const cplx ds = rep.dstar[j](r, s);
        c(r, s) += vj * (dv + ds) + xj * (dv - ds);
      }
  }
  return c;
}

}  // namespace indexlab::clifford
