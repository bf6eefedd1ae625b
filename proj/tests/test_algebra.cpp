#include <doctest.h>

#include <cmath>

#include "indexlab/clifford.hpp"
#include "indexlab/cstar.hpp"

using namespace indexlab;
using namespace indexlab::cstar;

TEST_CASE("k0 of the zero and identity projections") {
  Algebra a({1, 2});
  auto zero = AMatrix::zero(a, 2);
  auto z = k0_of_projection(zero, 1e-6);
  CHECK(z.ranks == std::vector<long long>{0, 0});

  auto one = AMatrix::identity(a, 3);
  auto o = k0_of_projection(one, 1e-6);
  CHECK(o.ranks == std::vector<long long>{3, 3});  // full rank per block = m
}

TEST_CASE("rank-1 projection in the first block only") {
  Algebra a({1, 2});
  auto p = AMatrix::zero(a, 2);
  p.block[0](0, 0) = 1.0;
  auto k = k0_of_projection(p, 1e-6);
  CHECK(k.ranks == std::vector<long long>{1, 0});
}

TEST_CASE("ambiguous projections are a hard error") {
  Algebra a({1});
  auto p = AMatrix::zero(a, 1);
  p.block[0](0, 0) = 0.4;  // eigenvalue in the forbidden band
  CHECK_THROWS_AS((void)k0_of_projection(p, 1e-6), Error);
  // a non-multiple of the block size is rejected too
  Algebra m2({2});
  auto q = AMatrix::zero(m2, 1);
  q.block[0](0, 0) = 1.0;  // matrix rank 1 inside M_2
  CHECK_THROWS_AS((void)k0_of_projection(q, 1e-6), Error);
}

TEST_CASE("difference_class arithmetic") {
  Algebra a({1, 1});
  auto p = AMatrix::zero(a, 3);
  auto q = AMatrix::zero(a, 3);
  // p has ranks (2, 1), q has ranks (0, 3)
  p.block[0](0, 0) = p.block[0](1, 1) = 1.0;
  p.block[1](0, 0) = 1.0;
  for (int i = 0; i < 3; ++i) q.block[1](i, i) = 1.0;
  auto d = difference_class(p, q, 1e-6);
  CHECK(d.ranks == std::vector<long long>{2, -2});
  auto z = difference_class(p, p, 1e-6);
  CHECK(z.ranks == std::vector<long long>{0, 0});

  auto q2 = AMatrix::zero(a, 2);
  CHECK_THROWS_AS((void)difference_class(p, q2, 1e-6), Error);
}

TEST_CASE("amplify scales ranks and preserves norm") {
  Algebra a({1});
  auto x = AMatrix::zero(a, 1);
  x.block[0](0, 0) = 2.0;
  auto y = amplify(x, 3);
  CHECK(y.block[0].rows() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(y.block[0](i, i) - cplx(2.0, 0.0)) < 1e-15);

  Algebra ab({1, 1});
  auto p = AMatrix::zero(ab, 1);
  p.block[0](0, 0) = 1.0;  // ranks (1, 0)
  auto pk = k0_of_projection(p, 1e-6);
  auto p2 = amplify(p, 2);
  auto pk2 = k0_of_projection(p2, 1e-6);
  for (std::size_t i = 0; i < pk.ranks.size(); ++i)
    CHECK(pk2.ranks[i] == 2 * pk.ranks[i]);

  CHECK_THROWS_AS((void)amplify(x, 0), Error);
}

TEST_CASE("K0 classes of direct sums add") {
  Algebra a({1, 2});
  Rng rng(23);
  auto make_proj = [&](int seed) {
    Rng r(seed);
    AMatrix p = AMatrix::zero(a, 2);
    for (std::size_t b = 0; b < p.block.size(); ++b) {
      // scalar spectral cut tensored with the block identity keeps the
      // projection A-linear (integer module rank)
      const std::size_t m = p.amplification;
      const std::size_t kb = static_cast<std::size_t>(a.blocks[b]);
      ComplexMatrix h(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) h(i, j) = r.normal_cplx();
      h.hermitize();
      auto s = linalg::hermitian_eig(h);
      ComplexMatrix q =
          linalg::apply_function(s, [](double l) { return l > 0 ? 1.0 : 0.0; });
      p.block[b] = kron(q, ComplexMatrix::identity(kb));
      p.block[b].hermitize();
    }
    return p;
  };
  auto p = make_proj(1), q = make_proj(2), p2 = make_proj(3), q2 = make_proj(4);
  // direct sums via block-diagonal stacking
  auto dsum = [&](const AMatrix& x, const AMatrix& y) {
    AMatrix out = AMatrix::zero(a, x.amplification + y.amplification);
    for (std::size_t b = 0; b < a.block_count(); ++b) {
      out.block[b] = ComplexMatrix(x.block[b].rows() + y.block[b].rows(),
                                   x.block[b].rows() + y.block[b].rows());
      for (std::size_t i = 0; i < x.block[b].rows(); ++i)
        for (std::size_t j = 0; j < x.block[b].rows(); ++j)
          out.block[b](i, j) = x.block[b](i, j);
      const std::size_t off = x.block[b].rows();
      for (std::size_t i = 0; i < y.block[b].rows(); ++i)
        for (std::size_t j = 0; j < y.block[b].rows(); ++j)
          out.block[b](off + i, off + j) = y.block[b](i, j);
    }
    return out;
  };
  auto lhs = difference_class(dsum(p, p2), dsum(q, q2), 1e-6);
  auto rhs = difference_class(p, q, 1e-6) + difference_class(p2, q2, 1e-6);
  CHECK(lhs.ranks == rhs.ranks);
  (void)rng;
}

// ---------------------------------------------------------------------------

using namespace indexlab::clifford;

TEST_CASE("exterior multiplication for n = 1") {
  auto rep = build_clifford(1);
  // basis (1, e1): d maps 1 -> e1
  CHECK(rep.d[0](1, 0) == cplx(1.0, 0.0));
  CHECK(rep.d[0](0, 0) == cplx(0.0, 0.0));
  CHECK(rep.d[0](0, 1) == cplx(0.0, 0.0));
  CHECK(rep.d[0](1, 1) == cplx(0.0, 0.0));
  CHECK(rep.epsilon(0, 0) == cplx(1.0, 0.0));
  CHECK(rep.epsilon(1, 1) == cplx(-1.0, 0.0));
}

TEST_CASE("anticommutation relations are exact for n = 2") {
  auto rep = build_clifford(2);
  // brute force over all generators: d_j^2 = 0, {d_j, d_k^*} = delta_jk
  for (int j = 0; j < 2; ++j) {
    CHECK(matmul(rep.d[j], rep.d[j]).max_abs() == 0.0);
    for (int k = 0; k < 2; ++k) {
      ComplexMatrix anti = anticommutator(rep.d[j], rep.dstar[k]);
      if (j == k) anti -= ComplexMatrix::identity(4);
      CHECK(anti.max_abs() == 0.0);
    }
  }
  // epsilon relations
  ComplexMatrix e2 = matmul(rep.epsilon, rep.epsilon);
  e2 -= ComplexMatrix::identity(4);
  CHECK(e2.max_abs() == 0.0);
  for (int j = 0; j < 2; ++j)
    CHECK(anticommutator(rep.epsilon, rep.d[j]).max_abs() == 0.0);
  // adjoints are constructed, not computed
  for (int j = 0; j < 2; ++j)
    CHECK((rep.dstar[j] - rep.d[j].adjoint()).max_abs() == 0.0);
}

TEST_CASE("build_clifford rejects out-of-range dimensions") {
  CHECK_THROWS_AS((void)build_clifford(0), Error);
  CHECK_THROWS_AS((void)build_clifford(7), Error);
}

TEST_CASE("clifford_c on explicit small cases") {
  auto rep = build_clifford(1);
  ComplexMatrix z = clifford_c(rep, {0.0}, {0.0});
  CHECK(z.max_abs() == 0.0);

  ComplexMatrix c = clifford_c(rep, {1.0}, {0.0});
  CHECK(std::abs(c(0, 1) - cplx(1.0, 0.0)) == 0.0);
  CHECK(std::abs(c(1, 0) - cplx(1.0, 0.0)) == 0.0);
  ComplexMatrix sq = matmul(c, c);
  sq -= ComplexMatrix::identity(2);
  CHECK(sq.max_abs() == 0.0);

  CHECK_THROWS_AS((void)clifford_c(rep, {1.0, 2.0}, {0.0, 0.0}), Error);
}

TEST_CASE("clifford_c properties over random phase vectors") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(2));
    auto rep = build_clifford(n);
    std::vector<double> v(n), xi(n);
    double norm2 = 0.0;
    for (int j = 0; j < n; ++j) {
      v[j] = rng.normal();
      xi[j] = rng.normal();
      norm2 += v[j] * v[j] + xi[j] * xi[j];
    }
    auto c = clifford_c(rep, v, xi);
    CHECK((c - c.adjoint()).max_abs() < 1e-12);
    CHECK(anticommutator(c, rep.epsilon).max_abs() < 1e-12);
    ComplexMatrix sq = matmul(c, c);
    sq -= norm2 * ComplexMatrix::identity(sq.rows());
    CHECK(sq.max_abs() < 1e-12);
  }
}

TEST_CASE("clifford_c is exactly linear") {
  auto rep = build_clifford(2);
  auto a = clifford_c(rep, {0.3, -1.2}, {0.7, 0.1});
  auto b = clifford_c(rep, {1.1, 0.4}, {-0.2, 2.0});
  auto sum = clifford_c(rep, {1.4, -0.8}, {0.5, 2.1});
  CHECK((a + b - sum).max_abs() < 1e-15);
}

TEST_CASE("n = 1 off-diagonal block is the Bott generator v + i xi") {
  auto rep = build_clifford(1);
  const double v = 0.8, xi = -1.3;
  auto c = clifford_c(rep, {v}, {xi});
  // even/odd off-diagonal entry (row odd, col even in (1, e1) ordering)
  CHECK(std::abs(c(1, 0) - cplx(v, xi)) < 1e-15);
  CHECK(std::abs(c(0, 1) - cplx(v, -xi)) < 1e-15);
}
