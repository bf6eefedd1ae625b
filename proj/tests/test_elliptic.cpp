#include <doctest.h>

#include <cmath>

#include "indexlab/elliptic.hpp"

using namespace indexlab;
using namespace indexlab::elliptic;

namespace {

cplx resolvent_sq(double y) { return 1.0 / (1.0 + y * y); }

double bump(double u) {
  const double u2 = u * u;
  return u2 >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - u2));
}

// D = -i (h d/dx + h'/2), h = 2 + sin x, on the N-point circle
FirstOrderOp h_op(std::size_t N) {
  auto grid = quantize::QuantizationGrid::circle(N);
  cstar::Algebra alg({1});
  std::vector<ComplexMatrix> a1(N, ComplexMatrix(1, 1)), b(N, ComplexMatrix(1, 1));
  for (std::size_t j = 0; j < N; ++j) {
    const double x = grid.coord(j);
    a1[j](0, 0) = cplx(0.0, -(2.0 + std::sin(x)));
    b[j](0, 0) = cplx(0.0, -0.5 * std::cos(x));
  }
  return make_first_order_op(grid, alg, 1, {{a1}}, {b});
}

FirstOrderOp const_op(std::size_t N) {
  auto grid = quantize::QuantizationGrid::circle(N);
  cstar::Algebra alg({1});
  std::vector<ComplexMatrix> a1(N, ComplexMatrix(1, 1)), b(N, ComplexMatrix(1, 1));
  for (std::size_t j = 0; j < N; ++j) a1[j](0, 0) = cplx(0.0, -1.0);
  return make_first_order_op(grid, alg, 1, {{a1}}, {b});
}

}  // namespace

TEST_CASE("make_first_order_op validates its inputs") {
  // the h-operator is valid and its symbol is h(x) xi
  auto op = h_op(32);
  CHECK(op.ellipticity_c0 == doctest::Approx(1.0).epsilon(1e-10));
  auto s = op.symbol(0, 5, {2.0});
  const double x = op.grid.coord(5);
  CHECK(std::abs(s(0, 0) - cplx((2.0 + std::sin(x)) * 2.0, 0.0)) < 1e-12);

  // constant-coefficient operator is fine
  (void)const_op(16);

  // Hermitian (rather than anti-Hermitian) a is rejected
  auto grid = quantize::QuantizationGrid::circle(16);
  cstar::Algebra alg({1});
  std::vector<ComplexMatrix> a1(16, ComplexMatrix(1, 1)), b(16, ComplexMatrix(1, 1));
  for (auto& m : a1) m(0, 0) = 1.0;
  CHECK_THROWS_AS(
      (void)make_first_order_op(grid, alg, 1, {{a1}}, {b}), Error);

  // broken self-adjointness identity is rejected: b = 0 but div a != 0
  for (std::size_t j = 0; j < 16; ++j)
    a1[j](0, 0) = cplx(0.0, -(2.0 + std::sin(grid.coord(j))));
  std::vector<ComplexMatrix> bz(16, ComplexMatrix(1, 1));
  CHECK_THROWS_AS(
      (void)make_first_order_op(grid, alg, 1, {{a1}}, {bz}), Error);

  // vanishing symbol is not elliptic
  std::vector<ComplexMatrix> az(16, ComplexMatrix(1, 1));
  CHECK_THROWS_AS(
      (void)make_first_order_op(grid, alg, 1, {{az}}, {bz}), Error);
}

TEST_CASE("discretized -i d/dx has integer spectrum") {
  auto op = const_op(64);
  auto blocks = discretize(op);
  auto vals = linalg::hermitian_eigenvalues(blocks[0]);
  for (std::size_t k = 0; k < 64; ++k) {
    const double expect = static_cast<double>(static_cast<long long>(k) - 32);
    CHECK(std::abs(vals[k] - expect) < 1e-9);
  }
}

TEST_CASE("discretization is Hermitian and zero maps to zero") {
  auto op = h_op(64);
  auto blocks = discretize(op);
  CHECK(blocks[0].hermiticity_defect() < 1e-10);

  auto grid = quantize::QuantizationGrid::circle(16);
  cstar::Algebra alg({1});
  std::vector<ComplexMatrix> a1(16, ComplexMatrix(1, 1)), b(16, ComplexMatrix(1, 1));
  FirstOrderOp zero;
  zero.grid = grid;
  zero.algebra = alg;
  zero.k = 1;
  zero.a = {{a1}};
  zero.b = {b};
  zero.ellipticity_c0 = 0.0;  // bypass validation for the degenerate case
  auto zb = discretize(zero);
  CHECK(zb[0].max_abs() == 0.0);
}

TEST_CASE("commutator bound of Lemma 4.3") {
  auto op = const_op(64);
  const std::size_t N = 64;
  // phi constant: commutator vanishes
  std::vector<double> phic(N, 2.5);
  auto r0 = commutator_bound_check(op, phic);
  CHECK(r0.lhs < 1e-10);

  // phi = sin x against D = -i d/dx: [D, M_phi] = -i cos x, both sides 1
  // (the band compression converges to the continuum value like 1/N^2, so
  // this equality check runs at a finer grid)
  auto op256 = const_op(256);
  std::vector<double> phi(256);
  for (std::size_t j = 0; j < 256; ++j) phi[j] = std::sin(op256.grid.coord(j));
  auto r = commutator_bound_check(op256, phi);
  CHECK(r.lhs == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.ok);

  // variable-coefficient operator: inequality only
  auto oph = h_op(64);
  std::vector<double> phi2(N);
  for (std::size_t j = 0; j < N; ++j) phi2[j] = std::cos(oph.grid.coord(j));
  auto rh = commutator_bound_check(oph, phi2);
  CHECK(rh.ok);
  CHECK(rh.lhs <= rh.rhs * (1.0 + 1e-3));

  // a rough phi is rejected
  std::vector<double> rough(N);
  for (std::size_t j = 0; j < N; ++j) rough[j] = (j % 2) ? 1.0 : -1.0;
  CHECK_THROWS_AS((void)commutator_bound_check(op, rough), Error);
}

TEST_CASE("Lemma 4.5 decay tables") {
  const std::size_t N = 64;
  auto op1 = h_op(N);
  auto op2 = op1;
  // order-zero Hermitian difference supported away from phi
  for (std::size_t j = 0; j < N; ++j) {
    double d = std::abs(op1.grid.coord(j) - kPi);
    d = std::min(d, 2.0 * kPi - d);
    op2.b[0][j](0, 0) += 1.5 * bump(d / (kPi / 3.0));
  }
  std::vector<double> phi(N);
  for (std::size_t j = 0; j < N; ++j)
    phi[j] = bump(op1.grid.coord(j) / (kPi / 3.0));

  auto res = lemma45_decay(op1, op2, phi,
                           [](double y) { return resolvent_sq(y); },
                           {1.0, 4.0, 16.0, 64.0, 128.0});
  CHECK(res.resolvent_bound_ok);
  CHECK(res.part1.value.back() < 0.05);
  CHECK(res.part2.value.back() < 0.05);
  CHECK(res.part3.value.back() < 0.05);
  CHECK(res.part1.value.back() < res.part1.value.front());
  CHECK(res.part2.value.back() < res.part2.value.front());

  // differing first-order parts violate the part-2 precondition
  auto op3 = op1;
  for (std::size_t j = 0; j < N; ++j) op3.a[0][0][j](0, 0) *= 1.5;
  CHECK_THROWS_AS((void)lemma45_decay(op1, op3, phi,
                                      [](double y) { return resolvent_sq(y); },
                                      {1.0, 2.0, 4.0, 8.0}),
                  Error);
}

TEST_CASE("coefficient freezing") {
  const std::size_t N = 64;
  auto op = h_op(N);
  // constant-coefficient operator: freezing changes nothing
  auto cop = const_op(N);
  auto rows0 = freeze_compare(cop, 10, {1.0, 0.5},
                              [](double y) { return resolvent_sq(y); }, 16.0);
  for (const auto& r : rows0) CHECK(r.norm < 1e-10);

  auto rows = freeze_compare(op, N / 2, {kPi / 2, kPi / 8, kPi / 16},
                             [](double y) { return resolvent_sq(y); }, 64.0);
  CHECK(rows[1].norm < rows[0].norm);
  CHECK(rows[2].norm < rows[1].norm);
  CHECK(rows[2].norm < 0.1);
  CHECK(rows[2].delta < rows[0].delta);
}

TEST_CASE("quantization convergence on the circle") {
  const std::size_t N = 128;
  std::vector<double> phi(N, 1.0);
  // constant-coefficient control: the multiplier calculus is exact
  auto ctrl = quantization_convergence(const_op(N), phi,
                                       [](double y) { return resolvent_sq(y); },
                                       {1.0, 8.0, 64.0});
  for (double v : ctrl.value) CHECK(v < 1e-8);

  // scales stay below N/8 so the band edge remains resolved
  auto table = quantization_convergence(h_op(N), phi,
                                        [](double y) { return resolvent_sq(y); },
                                        {2.0, 4.0, 8.0, 16.0});
  CHECK(table.value.back() < 0.05);
  CHECK(table.nonincreasing(1e-12));
}

TEST_CASE("symbol resolvent decay") {
  auto op = h_op(32);
  auto rep = symbol_resolvent_decay(op, {0.0, 1.0, 2.0, 4.0, 8.0, 16.0});
  CHECK(rep.resolvent_sup.front() <= 1.0 + 1e-12);  // Hermitian resolvent bound
  CHECK(rep.homogeneity_ok);
  // scalar closed form: asymptotic constant C = 1 / min h = 1
  CHECK(rep.c0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rep.bound_constant == doctest::Approx(1.0).epsilon(0.1));
  for (std::size_t i = 1; i < rep.resolvent_sup.size(); ++i)
    CHECK(rep.resolvent_sup[i] <= rep.resolvent_sup[i - 1] + 1e-12);
}

TEST_CASE("cayley transform basics") {
  // D identically zero: U = -I
  auto grid = quantize::QuantizationGrid::circle(16);
  cstar::Algebra alg({1});
  std::vector<ComplexMatrix> a1(16, ComplexMatrix(1, 1)), b(16, ComplexMatrix(1, 1));
  FirstOrderOp zero;
  zero.grid = grid;
  zero.algebra = alg;
  zero.k = 1;
  zero.a = {{a1}};
  zero.b = {b};
  auto dz = double_first_order(zero);
  auto u0 = cayley(dz, 0, 1.0);
  u0 += ComplexMatrix::identity(u0.rows());
  CHECK(u0.max_abs() < 1e-12);

  // eigenvalues map by the Moebius rule and eps U is an involution
  auto dop = double_first_order(const_op(16));
  const double t = 2.0;
  auto u = cayley(dop, 0, t);
  ComplexMatrix uu = gram(u);
  uu -= ComplexMatrix::identity(uu.rows());
  CHECK(uu.frobenius() < 1e-10);

  const auto& red = dop.blocks[0]->reduced({});
  ComplexMatrix eps(u.rows(), u.rows());
  for (std::size_t i = 0; i < u.rows(); ++i) eps(i, i) = red.eps_signs[i];
  ComplexMatrix eu = matmul(eps, u);
  ComplexMatrix eu2 = matmul(eu, eu);
  eu2 -= ComplexMatrix::identity(eu2.rows());
  CHECK(linalg::operator_norm(eu2) < 1e-10);
  CHECK((eu - eu.adjoint()).max_abs() < 1e-10);

  // scalar Moebius oracle on one eigenvalue
  auto se = linalg::hermitian_eig(red.op);
  auto ue = linalg::apply_function(se, [t](double lam) {
    return (cplx(lam / t, 1.0)) / (cplx(lam / t, -1.0));
  });
  CHECK((u - ue).frobenius() < 1e-8);
}

TEST_CASE("analytic index vanishes for an invertible doubled operator") {
  auto dop = double_first_order(h_op(32));
  auto k = analytic_index(dop, 0.5);
  CHECK(k.ranks == std::vector<long long>{0});
}

TEST_CASE("oscillator embeds as a doubled operator of index one") {
  bott::OscillatorConfig c;
  c.n = 1;
  c.t = 1.0;
  c.N = 64;
  c.L = 7.0;
  auto dop = from_bott(bott::build_bott(c));
  auto k = analytic_index(dop, 0.5);
  CHECK(k.ranks == std::vector<long long>{1});
}

TEST_CASE("twisted torus Dirac: kernel, gap and index") {
  // d = 0: constant spinors in both chiralities, index 0
  auto d0 = twisted_dirac_torus({0}, 16, cstar::Algebra({1}));
  auto k0 = analytic_index(d0, 0.5);
  CHECK(k0.ranks == std::vector<long long>{0});

  // d = 1: one positive-chirality kernel mode
  auto d1 = twisted_dirac_torus({1}, 16, cstar::Algebra({1}));
  const auto& an = d1.blocks[0]->analysis({});
  CHECK(an.plus.physical == 1);
  CHECK(an.minus.physical == 0);
  auto k1 = analytic_index(d1, 0.5);
  CHECK(k1.ranks == std::vector<long long>{1});
  // Landau gap sqrt(2B) = sqrt(1/pi)
  double first_level = 1e300;
  for (double v : an.all_values)
    if (std::abs(v) > an.window) first_level = std::min(first_level, std::abs(v));
  CHECK(first_level == doctest::Approx(std::sqrt(1.0 / kPi)).epsilon(1e-3));

  // d = -2: kernel moves to the negative chirality
  auto dm2 = twisted_dirac_torus({-2}, 16, cstar::Algebra({1}));
  auto km2 = analytic_index(dm2, 0.5);
  CHECK(km2.ranks == std::vector<long long>{-2});

  // mixed fluxes over C + C, and the M_2 block
  auto dmix = twisted_dirac_torus({2, -1}, 16, cstar::Algebra({1, 1}));
  auto kmix = analytic_index(dmix, 0.5);
  CHECK(kmix.ranks == std::vector<long long>{2, -1});
  CHECK(topological_index_torus({2, -1}, dmix.algebra) == kmix);

  auto dm2blk = twisted_dirac_torus({1}, 16, cstar::Algebra({2}));
  auto km = analytic_index(dm2blk, 0.5);
  CHECK(km.ranks == std::vector<long long>{1});

  // flux length mismatch is rejected
  CHECK_THROWS_AS(
      (void)twisted_dirac_torus({1, 2}, 16, cstar::Algebra({1})), Error);
  // too-coarse grid is rejected
  CHECK_THROWS_AS(
      (void)twisted_dirac_torus({3}, 16, cstar::Algebra({1})), Error);
}

TEST_CASE("chirality pairing of the nonzero spectrum") {
  auto d1 = twisted_dirac_torus({1}, 16, cstar::Algebra({1}));
  auto full = linalg::hermitian_eig(d1.blocks[0]->op);
  const auto& signs = d1.blocks[0]->eps_signs;
  // for each eigenvector with lambda > gap/2, eps maps it to the -lambda one
  const double gap = d1.blocks[0]->gap;
  const std::size_t n = full.eigenvalues.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double lam = full.eigenvalues[j];
    if (lam < 0.5 * gap || lam > 2.0) continue;
    std::vector<cplx> flipped(n);
    for (std::size_t i = 0; i < n; ++i)
      flipped[i] = signs[i] * full.eigenvectors(i, j);
    // residual of (D + lam) on the flipped vector: eps psi_lam = psi_-lam
    auto dv = matvec(d1.blocks[0]->op, flipped);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      resid = std::max(resid, std::abs(dv[i] + lam * flipped[i]));
    CHECK(resid < 1e-6);
  }
}

TEST_CASE("index stability under a small order-zero perturbation") {
  auto d1 = twisted_dirac_torus({1}, 16, cstar::Algebra({1}));
  auto base = analytic_index(d1, 0.5);
  // perturb: Hermitian, odd (anticommutes with eps), norm below gap/2
  auto& blk = *d1.blocks[0];
  Rng rng(77);
  const std::size_t n = blk.op.rows();
  ComplexMatrix pert(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (blk.eps_signs[i] != blk.eps_signs[j]) pert(i, j) = rng.normal_cplx();
  pert.hermitize();
  const double scale = 0.2 * blk.gap / linalg::operator_norm(pert);
  pert *= cplx(scale, 0.0);
  blk.op += pert;
  blk.analysis_cache.reset();
  blk.reduction_cache.reset();
  auto perturbed = analytic_index(d1, 0.5);
  CHECK(perturbed == base);
}

TEST_CASE("gauge invariance of the index") {
  // conjugating by a diagonal unitary built from a smooth phase leaves the
  // index unchanged
  auto d1 = twisted_dirac_torus({2}, 16, cstar::Algebra({1}));
  auto base = analytic_index(d1, 0.5);
  auto& blk = *d1.blocks[0];
  const std::size_t N = 16, fib = 2;
  ComplexMatrix u(blk.op.rows(), blk.op.rows());
  for (std::size_t g = 0; g < N * N; ++g) {
    const double th = std::sin(2.0 * kPi * static_cast<double>(g / N) / N) +
                      std::cos(2.0 * kPi * static_cast<double>(g % N) / N);
    for (std::size_t s = 0; s < fib; ++s)
      u(g * fib + s, g * fib + s) = std::exp(cplx(0.0, th));
  }
  blk.op = matmul(u, matmul(blk.op, u.adjoint()));
  blk.op.hermitize();
  blk.analysis_cache.reset();
  blk.reduction_cache.reset();
  auto conj = analytic_index(d1, 0.5);
  CHECK(conj == base);
}

TEST_CASE("morphism index agrees with the dense projection route") {
  for (const auto& [flux, blocks] :
       std::vector<std::pair<std::vector<int>, std::vector<int>>>{
           {{0}, {1}}, {{1}, {1}}, {{-2}, {1}}, {{1, -1}, {1, 1}}, {{1}, {2}}}) {
    auto dop = twisted_dirac_torus(flux, 16, cstar::Algebra(blocks));
    double gap_min = 1e300;
    for (const auto& b : dop.blocks) gap_min = std::min(gap_min, b->gap);
    const double t_small = 0.1 * gap_min;
    auto fast = morphism_index(dop, t_small, 1e-6);
    auto dense = morphism_index_dense(dop, t_small, 1e-6);
    auto analytic = analytic_index(dop, 0.5);
    CHECK(fast == dense);
    CHECK(fast == analytic);
    CHECK(fast == topological_index_torus(flux, dop.algebra));
  }
}

TEST_CASE("morphism index: trivial kernel gives the zero class") {
  auto dop = double_first_order(h_op(32));
  const double gap = dop.blocks[0]->gap;
  auto k = morphism_index(dop, 0.05 * gap, 1e-6);
  CHECK(k.ranks == std::vector<long long>{0});
  // the Cayley-scale precondition is enforced
  CHECK_THROWS_AS((void)morphism_index(dop, 10.0 * gap, 1e-6), Error);
}

TEST_CASE("Lemma 5.5 defect for the flux Dirac at large t") {
  auto dop = twisted_dirac_torus({1}, 16, cstar::Algebra({1}));
  auto sym = dirac_symbol(dop, 0);
  quantize::PhaseFunction pf;
  pf.grid = dop.grid;
  pf.fiber = 2;
  pf.values = [&sym](const std::vector<double>&, const std::vector<double>& xi) {
    ComplexMatrix s = sym(xi);
    auto se = linalg::hermitian_eig(s);
    return linalg::apply_function(
        se, [](double y) { return 1.0 / (1.0 + y * y); });
  };
  ComplexMatrix lhs = quantize::phi_t(pf, 64.0);
  auto se = linalg::hermitian_eig(dop.blocks[0]->op);
  ComplexMatrix rhs = linalg::apply_function(
      se, [](double y) { return 1.0 / (1.0 + (y / 64.0) * (y / 64.0)); });
  CHECK(linalg::operator_norm(lhs - rhs) < 0.1);
}
