#pragma once

#include <functional>
#include <vector>

#include "indexlab/matrix.hpp"

namespace indexlab::quantize {

enum class Topology { periodized_line, circle, torus };

// Uniform periodic grid on [-L, L)^n together with its exact DFT dual.
// Frequencies are pi*k/L with k in DFT order {0,...,N/2-1, -N/2,...,-1};
// for circle/torus L = pi so the frequencies are the integers. The dense
// operator builders work for any even N; the radix-2 dft() in linalg is the
// only power-of-two-restricted path.
struct QuantizationGrid {
  int n = 1;           // spatial dimension (1 or 2)
  std::size_t N = 0;   // points per axis
  double L = 0.0;      // half-period
  Topology topology = Topology::periodized_line;

  QuantizationGrid() = default;
  QuantizationGrid(int n_, std::size_t N_, double L_, Topology topo);

  static QuantizationGrid line(std::size_t N, double L);
  static QuantizationGrid circle(std::size_t N);
  static QuantizationGrid torus(std::size_t N);

  std::size_t points() const;             // N^n
  double dx() const { return 2.0 * L / static_cast<double>(N); }

  // per-axis coordinate / frequency of a 1-d index in 0..N-1
  double coord(std::size_t j) const { return -L + dx() * static_cast<double>(j); }
  double freq(std::size_t k) const;

  // flattened accessors (row-major over axes)
  std::vector<double> point_at(std::size_t flat) const;  // length n
  std::vector<double> freq_at(std::size_t flat) const;

  // Unitary DFT matrix W[k, j] = exp(-i xi_k x_j)/sqrt(N) per axis,
  // tensored over axes for n = 2.
  ComplexMatrix fourier_matrix() const;

  // Dense spectral differentiation along `axis`, acting on flattened grid
  // functions: W* diag(i xi) W on that axis.
  ComplexMatrix derivative_matrix(int axis) const;

  // Fourier multiplier g(xi / t): W* diag(g) W, scalar symbol.
  ComplexMatrix multiplier(const std::function<cplx(const std::vector<double>&)>& g,
                           double t) const;

  bool operator==(const QuantizationGrid& o) const {
    return n == o.n && N == o.N && L == o.L && topology == o.topology;
  }
};

}  // namespace indexlab::quantize
