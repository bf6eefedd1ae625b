#include "indexlab/grid.hpp"

#include <cmath>

namespace indexlab::quantize {

QuantizationGrid::QuantizationGrid(int n_, std::size_t N_, double L_,
                                   Topology topo)
    : n(n_), N(N_), L(L_), topology(topo) {
  require(n == 1 || n == 2, ErrorCode::invalid_argument,
          "grid dimension must be 1 or 2");
  require(N >= 8 && N % 2 == 0, ErrorCode::invalid_argument,
          "grid size must be even and >= 8");
  require(L > 0.0, ErrorCode::invalid_argument, "grid half-period must be > 0");
  if (topology == Topology::circle)
    require(n == 1, ErrorCode::invalid_argument, "circle grids are 1-d");
  if (topology == Topology::torus)
    require(n == 2, ErrorCode::invalid_argument, "torus grids are 2-d");
}

QuantizationGrid QuantizationGrid::line(std::size_t N, double L) {
  return QuantizationGrid(1, N, L, Topology::periodized_line);
}
QuantizationGrid QuantizationGrid::circle(std::size_t N) {
  return QuantizationGrid(1, N, kPi, Topology::circle);
}
QuantizationGrid QuantizationGrid::torus(std::size_t N) {
  return QuantizationGrid(2, N, kPi, Topology::torus);
}

std::size_t QuantizationGrid::points() const { return n == 1 ? N : N * N; }

double QuantizationGrid::freq(std::size_t k) const {
  const long long kk = static_cast<long long>(k);
  const long long half = static_cast<long long>(N) / 2;
  const long long signedk = (kk < half) ? kk : kk - static_cast<long long>(N);
  return kPi * static_cast<double>(signedk) / L;
}

std::vector<double> QuantizationGrid::point_at(std::size_t flat) const {
  if (n == 1) return {coord(flat)};
  return {coord(flat / N), coord(flat % N)};
}

std::vector<double> QuantizationGrid::freq_at(std::size_t flat) const {
  if (n == 1) return {freq(flat)};
  return {freq(flat / N), freq(flat % N)};
}

ComplexMatrix QuantizationGrid::fourier_matrix() const {
  ComplexMatrix w1(N, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (std::size_t k = 0; k < N; ++k) {
    const double xi = freq(k);
    for (std::size_t j = 0; j < N; ++j) {
      const double phase = -xi * coord(j);
      w1(k, j) = cplx(std::cos(phase), std::sin(phase)) * scale;
    }
  }
  if (n == 1) return w1;
  return kron(w1, w1);
}

ComplexMatrix QuantizationGrid::derivative_matrix(int axis) const {
  require(axis >= 0 && axis < n, ErrorCode::invalid_argument,
          "derivative axis out of range");
  ComplexMatrix w1(N, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t j = 0; j < N; ++j) {
      const double phase = -freq(k) * coord(j);
      w1(k, j) = cplx(std::cos(phase), std::sin(phase)) * scale;
    }
  ComplexMatrix diag(N, N);
  for (std::size_t k = 0; k < N; ++k) diag(k, k) = cplx(0.0, freq(k));
  ComplexMatrix d1 = matmul(w1.adjoint(), matmul(diag, w1));
  if (n == 1) return d1;
  ComplexMatrix eye = ComplexMatrix::identity(N);
  return axis == 0 ? kron(d1, eye) : kron(eye, d1);
}

ComplexMatrix QuantizationGrid::multiplier(
    const std::function<cplx(const std::vector<double>&)>& g, double t) const {
  require(t > 0.0, ErrorCode::invalid_argument, "multiplier scale must be > 0");
  const std::size_t m = points();
  ComplexMatrix w = fourier_matrix();
  ComplexMatrix wd = w;  // diag(g) * W
  for (std::size_t k = 0; k < m; ++k) {
    auto xi = freq_at(k);
    for (auto& c : xi) c /= t;
    const cplx gv = g(xi);
    for (std::size_t j = 0; j < m; ++j) wd(k, j) *= gv;
  }
  return matmul(w.adjoint(), wd);
}

}  // namespace indexlab::quantize
