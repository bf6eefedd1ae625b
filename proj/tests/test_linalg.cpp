#include <doctest.h>

#include <cmath>

#include "indexlab/linalg.hpp"

using namespace indexlab;
using namespace indexlab::linalg;

namespace {

ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.normal_cplx();
  m.hermitize();
  return m;
}

}  // namespace

TEST_CASE("hermitian_eig on the identity") {
  auto s = hermitian_eig(ComplexMatrix::identity(2));
  CHECK(s.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(s.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(s.unitarity_residual() < 1e-12);
}

TEST_CASE("hermitian_eig sorts a diagonal matrix ascending") {
  auto s = hermitian_eig(ComplexMatrix::diagonal(std::vector<double>{3.0, -1.0}));
  CHECK(s.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(s.eigenvalues[1] == doctest::Approx(3.0));
}

TEST_CASE("hermitian_eig reconstruction on random 50x50") {
  Rng rng(1);
  auto m = random_hermitian(50, rng);
  auto s = hermitian_eig(m);
  CHECK(s.reconstruction_residual(m) <= 1e-10 * (1.0 + m.frobenius()));
  CHECK(s.unitarity_residual() <= 1e-10);
}

TEST_CASE("hermitian_eig rejects non-square and non-finite input") {
  CHECK_THROWS_AS((void)hermitian_eig(ComplexMatrix(2, 3)), Error);
  ComplexMatrix bad(2, 2);
  bad(0, 1) = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS((void)hermitian_eig(bad), Error);
}

TEST_CASE("apply_function identity and scalar resolvent") {
  auto s = hermitian_eig(ComplexMatrix::diagonal(std::vector<double>{2.0, 5.0}));
  auto id = apply_function(s, [](double x) { return cplx(x, 0.0); });
  CHECK(std::abs(id(0, 0) - cplx(2.0, 0.0)) < 1e-12);
  CHECK(std::abs(id(1, 1) - cplx(5.0, 0.0)) < 1e-12);

  auto s0 = hermitian_eig(ComplexMatrix(1, 1));
  auto r = apply_function(s0, [](double x) { return 1.0 / cplx(x, -1.0); });
  CHECK(std::abs(r(0, 0) - cplx(0.0, 1.0)) < 1e-14);  // (0 - i)^{-1} = i
}

TEST_CASE("apply_function resolvent-squared matches a linear-solve oracle") {
  Rng rng(7);
  auto h = random_hermitian(24, rng);
  auto s = hermitian_eig(h);
  auto lhs = apply_function(s, [](double x) { return 1.0 / (1.0 + x * x); });
  // oracle: (I + H^2)^{-1} by LU solve, an independent route
  ComplexMatrix h2 = matmul(h, h);
  h2 += ComplexMatrix::identity(24);
  auto rhs = lu_inverse(h2);
  CHECK((lhs - rhs).frobenius() < 1e-8);
}

TEST_CASE("apply_function of a real function is Hermitian") {
  Rng rng(3);
  auto s = hermitian_eig(random_hermitian(20, rng));
  auto m = apply_function(s, [](double x) { return cplx(std::tanh(x), 0.0); });
  CHECK(m.hermiticity_defect() < 1e-12);
}

TEST_CASE("apply_function rejects a function undefined at an eigenvalue") {
  auto s = hermitian_eig(ComplexMatrix::diagonal(std::vector<double>{0.0, 1.0}));
  CHECK_THROWS_AS(
      (void)apply_function(s, [](double x) { return cplx(1.0 / x, 0.0); }),
      Error);
}

TEST_CASE("functional calculus is multiplicative on a shared basis") {
  Rng rng(11);
  auto s = hermitian_eig(random_hermitian(30, rng));
  auto f = [](double x) { return cplx(std::cos(x), 0.0); };
  auto g = [](double x) { return 1.0 / (1.0 + x * x); };
  auto fg = apply_function(s, [&](double x) { return f(x) * g(x); });
  auto prod = matmul(apply_function(s, f), apply_function(s, g));
  CHECK((fg - prod).frobenius() < 1e-10);
  // conj(f) maps to the adjoint
  auto cf = apply_function(s, [](double x) { return cplx(0.0, x); });
  auto cfbar = apply_function(s, [](double x) { return cplx(0.0, -x); });
  CHECK((cf.adjoint() - cfbar).frobenius() < 1e-12);
}

TEST_CASE("operator_norm basics") {
  CHECK(operator_norm(ComplexMatrix(3, 3)) == 0.0);
  CHECK_THROWS_AS((void)operator_norm(ComplexMatrix()), Error);

  // a unitary has norm 1
  Rng rng(5);
  auto s = hermitian_eig(random_hermitian(16, rng));
  auto u = apply_function(s, [](double x) { return std::exp(cplx(0.0, x)); });
  CHECK(operator_norm(u) == doctest::Approx(1.0).epsilon(1e-8));

  // rank-1 uv^*: norm = |u||v| (closed-form oracle)
  ComplexMatrix uv(4, 4);
  std::vector<cplx> uu = {1.0, 1.0, 1.0, 1.0};   // |u| = 2
  std::vector<cplx> vv = {2.0, 2.0, 1.0, 0.0};   // |v| = 3
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) uv(i, j) = uu[i] * std::conj(vv[j]);
  CHECK(operator_norm(uv) == doctest::Approx(6.0).epsilon(1e-8));
}

TEST_CASE("operator_norm is submultiplicative on random pairs") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix a(12, 12), b(12, 12);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) {
        a(i, j) = rng.normal_cplx();
        b(i, j) = rng.normal_cplx();
      }
    CHECK(operator_norm(matmul(a, b)) <=
          operator_norm(a) * operator_norm(b) + 1e-8);
  }
}

TEST_CASE("dft unitary basics") {
  // constant vector -> delta at frequency 0
  std::vector<cplx> ones(16, cplx(1.0, 0.0));
  auto hat = dft(ones, DftDirection::forward);
  CHECK(std::abs(hat[0] - cplx(4.0, 0.0)) < 1e-12);
  for (std::size_t k = 1; k < 16; ++k) CHECK(std::abs(hat[k]) < 1e-12);

  // pure wave e^{2 pi i k j / N} -> delta at k
  const std::size_t N = 32, kk = 5;
  std::vector<cplx> wave(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double ph = 2.0 * kPi * static_cast<double>(kk * j) / N;
    wave[j] = cplx(std::cos(ph), std::sin(ph));
  }
  auto w = dft(wave, DftDirection::forward);
  CHECK(std::abs(w[kk]) == doctest::Approx(std::sqrt(double(N))));
  for (std::size_t k = 0; k < N; ++k)
    if (k != kk) CHECK(std::abs(w[k]) < 1e-10);
}

TEST_CASE("dft round trip is the identity") {
  Rng rng(21);
  std::vector<cplx> v(64);
  for (auto& x : v) x = rng.normal_cplx();
  auto back = dft(dft(v, DftDirection::forward), DftDirection::inverse);
  double err = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    err = std::max(err, std::abs(back[i] - v[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("dft rejects non-power-of-two lengths") {
  std::vector<cplx> v(24, cplx(1.0, 0.0));
  CHECK_THROWS_AS((void)dft(v, DftDirection::forward), Error);
}

TEST_CASE("windowed eigensolver agrees with the full one") {
  Rng rng(13);
  auto m = random_hermitian(60, rng);
  auto full = hermitian_eig(m);
  auto part = hermitian_eig_in_window(m, -0.5, 0.5);
  std::size_t expect = 0;
  for (double v : full.eigenvalues)
    if (v >= -0.5 && v <= 0.5) ++expect;
  CHECK(part.values.size() == expect);
  for (std::size_t j = 0; j < part.values.size(); ++j) {
    std::vector<cplx> v(60);
    for (std::size_t i = 0; i < 60; ++i) v[i] = part.vectors(i, j);
    auto mv = matvec(m, v);
    double resid = 0.0;
    for (std::size_t i = 0; i < 60; ++i)
      resid = std::max(resid, std::abs(mv[i] - part.values[j] * v[i]));
    CHECK(resid < 1e-9 * (1.0 + m.frobenius()));
  }
}

TEST_CASE("orthogonal_complement produces an isometry") {
  Rng rng(17);
  ComplexMatrix cols(10, 3);
  // orthonormalize three random columns through the eigensolver trick
  auto m = random_hermitian(10, rng);
  auto s = hermitian_eig(m);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 10; ++i) cols(i, j) = s.eigenvectors(i, j);
  auto comp = orthogonal_complement(10, cols);
  CHECK(comp.cols() == 7);
  auto g = gram(comp);
  g -= ComplexMatrix::identity(7);
  CHECK(g.frobenius() < 1e-12);
  // orthogonal to the input
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t p = 0; p < 7; ++p) {
      cplx dot = 0.0;
      for (std::size_t i = 0; i < 10; ++i)
        dot += std::conj(cols(i, j)) * comp(i, p);
      CHECK(std::abs(dot) < 1e-12);
    }
}
