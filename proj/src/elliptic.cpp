#include "indexlab/elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace indexlab::elliptic {

namespace {

std::vector<std::vector<double>> unit_directions(int n, int count = 32) {
  std::vector<std::vector<double>> dirs;
  if (n == 1) {
    dirs.push_back({1.0});
  } else {
    for (int j = 0; j < count; ++j) {
      const double th = kPi * static_cast<double>(j) / count;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  }
  return dirs;
}

// spectral derivative of a sampled fiber-matrix field, entrywise
std::vector<ComplexMatrix> field_derivative(
    const quantize::QuantizationGrid& grid, int axis,
    const std::vector<ComplexMatrix>& field) {
  const std::size_t pts = grid.points();
  const std::size_t fib = field[0].rows();
  ComplexMatrix dax = grid.derivative_matrix(axis);
  std::vector<ComplexMatrix> out(pts, ComplexMatrix(fib, fib));
  std::vector<cplx> col(pts), dcol(pts);
  for (std::size_t s = 0; s < fib; ++s)
    for (std::size_t s2 = 0; s2 < fib; ++s2) {
      for (std::size_t g = 0; g < pts; ++g) col[g] = field[g](s, s2);
      dcol = matvec(dax, col);
      for (std::size_t g = 0; g < pts; ++g) out[g](s, s2) = dcol[g];
    }
  return out;
}

double smooth_tail_fraction(const quantize::QuantizationGrid& grid,
                            const std::vector<double>& phi) {
  // fraction of Fourier mass above |k| > N/4, 1-d fields
  const std::size_t N = grid.N;
  double tail = 0.0, total = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
      const double ph =
          -2.0 * kPi * static_cast<double>(k * j) / static_cast<double>(N);
      acc += phi[j] * cplx(std::cos(ph), std::sin(ph));
    }
    const long long kk = static_cast<long long>(k);
    const long long ks = kk < static_cast<long long>(N / 2)
                             ? kk
                             : kk - static_cast<long long>(N);
    const double m = std::norm(acc);
    total += m;
    if (std::abs(ks) > static_cast<long long>(N / 4)) tail += m;
  }
  return total > 0 ? tail / total : 0.0;
}

}  // namespace

ComplexMatrix FirstOrderOp::symbol(std::size_t block, std::size_t point,
                                   const std::vector<double>& xi) const {
  const std::size_t fib = fiber_dim(block);
  ComplexMatrix s(fib, fib);
  for (int ax = 0; ax < grid.n; ++ax) {
    const ComplexMatrix& av = a[ax][block][point];
    const cplx w(0.0, xi[ax]);  // i * xi_j
    for (std::size_t r = 0; r < fib; ++r)
      for (std::size_t c = 0; c < fib; ++c) s(r, c) += w * av(r, c);
  }
  return s;
}

double FirstOrderOp::prop_at(std::size_t block, std::size_t point) const {
  double best = 0.0;
  for (const auto& xi : unit_directions(grid.n)) {
    auto vals = linalg::hermitian_eigenvalues(symbol(block, point, xi));
    for (double v : vals) best = std::max(best, std::abs(v));
  }
  return best;
}

FirstOrderOp make_first_order_op(
    const quantize::QuantizationGrid& grid, const cstar::Algebra& algebra,
    int k, std::vector<std::vector<std::vector<ComplexMatrix>>> a_samples,
    std::vector<std::vector<ComplexMatrix>> b_samples, const Tolerances& tol) {
  require(k >= 1, ErrorCode::invalid_argument, "module rank must be >= 1");
  FirstOrderOp op;
  op.grid = grid;
  op.algebra = algebra;
  op.k = k;
  op.a = std::move(a_samples);
  op.b = std::move(b_samples);
  const std::size_t pts = grid.points();
  const std::size_t r = algebra.block_count();
  require(op.a.size() == static_cast<std::size_t>(grid.n) && op.b.size() == r,
          ErrorCode::invalid_argument, "coefficient sample shapes mismatch");

  double scale = 1e-30;
  for (int ax = 0; ax < grid.n; ++ax) {
    require(op.a[ax].size() == r, ErrorCode::invalid_argument,
            "coefficient sample shapes mismatch");
    for (std::size_t i = 0; i < r; ++i) {
      require(op.a[ax][i].size() == pts, ErrorCode::invalid_argument,
              "coefficient sample shapes mismatch");
      for (const auto& m : op.a[ax][i]) scale = std::max(scale, m.max_abs());
    }
  }

  // a_j(x)^* = -a_j(x) pointwise
  for (int ax = 0; ax < grid.n; ++ax)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t g = 0; g < pts; ++g) {
        const auto& m = op.a[ax][i][g];
        require(m.rows() == op.fiber_dim(i), ErrorCode::invalid_argument,
                "coefficient fiber dimension mismatch");
        double dev = (m + m.adjoint()).max_abs();
        require(dev <= 1e-12 * std::max(1.0, scale), ErrorCode::precondition,
                "a_j is not anti-Hermitian at a grid point (defect " +
                    std::to_string(dev) + ")");
      }

  // b - b^* = sum_j d_j a_j within tolerance
  for (std::size_t i = 0; i < r; ++i) {
    require(op.b[i].size() == pts, ErrorCode::invalid_argument,
            "coefficient sample shapes mismatch");
    std::vector<ComplexMatrix> div(pts,
                                   ComplexMatrix(op.fiber_dim(i), op.fiber_dim(i)));
    for (int ax = 0; ax < grid.n; ++ax) {
      auto da = field_derivative(grid, ax, op.a[ax][i]);
      for (std::size_t g = 0; g < pts; ++g) div[g] += da[g];
    }
    double worst = 0.0;
    for (std::size_t g = 0; g < pts; ++g) {
      ComplexMatrix lhs = op.b[i][g] - op.b[i][g].adjoint();
      lhs -= div[g];
      worst = std::max(worst, lhs.max_abs());
    }
    require(worst <= 1e-8 * std::max(1.0, scale), ErrorCode::precondition,
            "formal self-adjointness identity fails (defect " +
                std::to_string(worst) + ")");
  }

  // ellipticity
  double c0 = 1e300;
  std::size_t worst_pt = 0;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t g = 0; g < pts; ++g)
      for (const auto& xi : unit_directions(grid.n)) {
        auto vals = linalg::hermitian_eigenvalues(op.symbol(i, g, xi));
        double smin = 1e300;
        for (double v : vals) smin = std::min(smin, std::abs(v));
        if (smin < c0) {
          c0 = smin;
          worst_pt = g;
        }
      }
  require(c0 > 1e-8 * std::max(1.0, scale), ErrorCode::precondition,
          "symbol is not elliptic: smallest singular value " +
              std::to_string(c0) + " at grid point " + std::to_string(worst_pt));
  op.ellipticity_c0 = c0;
  (void)tol;
  return op;
}

std::vector<ComplexMatrix> discretize(const FirstOrderOp& op,
                                      const Tolerances& tol) {
  const std::size_t pts = op.grid.points();
  std::vector<ComplexMatrix> out;
  for (std::size_t i = 0; i < op.algebra.block_count(); ++i) {
    const std::size_t fib = op.fiber_dim(i);
    const std::size_t dim = pts * fib;
    ComplexMatrix d(dim, dim);
    std::vector<ComplexMatrix> bsym(op.b[i]);
    for (int ax = 0; ax < op.grid.n; ++ax) {
      ComplexMatrix dax = op.grid.derivative_matrix(ax);
      // (M_a del + del M_a)/2:
      //  entry [(g,s),(h,s2)] = dax(g,h) * (a(g) + a(h))/2
      for (std::size_t g = 0; g < pts; ++g)
        for (std::size_t h = 0; h < pts; ++h) {
          const cplx dv = dax(g, h);
          if (dv == cplx(0.0, 0.0)) continue;
          const ComplexMatrix& ag = op.a[ax][i][g];
          const ComplexMatrix& ah = op.a[ax][i][h];
          for (std::size_t s = 0; s < fib; ++s)
            for (std::size_t s2 = 0; s2 < fib; ++s2) {
              const cplx av = 0.5 * (ag(s, s2) + ah(s, s2));
              if (av != cplx(0.0, 0.0)) d(g * fib + s, h * fib + s2) += dv * av;
            }
        }
      // absorb the correction: b_sym = b - (1/2) sum_j d_j a_j
      auto da = field_derivative(op.grid, ax, op.a[ax][i]);
      for (std::size_t g = 0; g < pts; ++g) {
        ComplexMatrix half = da[g];
        half *= cplx(0.5, 0.0);
        bsym[g] -= half;
      }
    }
    for (std::size_t g = 0; g < pts; ++g) {
      ComplexMatrix hb = bsym[g];
      const double herm_dev = (hb - hb.adjoint()).max_abs();
      require(herm_dev <= 1e-7, ErrorCode::numerical_failure,
              "zeroth-order part failed to Hermitize");
      hb.hermitize();
      for (std::size_t s = 0; s < fib; ++s)
        for (std::size_t s2 = 0; s2 < fib; ++s2)
          d(g * fib + s, g * fib + s2) += hb(s, s2);
    }
    require(d.hermiticity_defect() <= 1e-8, ErrorCode::numerical_failure,
            "discretized operator is not Hermitian");
    d.hermitize();
    out.push_back(std::move(d));
  }
  (void)tol;
  return out;
}

SymbolReport symbol_resolvent_decay(const FirstOrderOp& op,
                                    const std::vector<double>& shells) {
  SymbolReport rep;
  rep.c0 = op.ellipticity_c0;
  const std::size_t pts = op.grid.points();
  for (double radius : shells) {
    double sup = 0.0;
    for (std::size_t i = 0; i < op.algebra.block_count(); ++i)
      for (std::size_t g = 0; g < pts; ++g)
        for (const auto& dir : unit_directions(op.grid.n, 16)) {
          std::vector<double> xi = dir;
          for (auto& c : xi) c *= radius;
          auto vals = linalg::hermitian_eigenvalues(op.symbol(i, g, xi));
          double mn = 1e300;
          for (double v : vals) mn = std::min(mn, std::abs(v));
          sup = std::max(sup, 1.0 / std::sqrt(1.0 + mn * mn));
        }
    rep.shell_radius.push_back(radius);
    rep.resolvent_sup.push_back(sup);
  }
  // asymptotic constant: sup ~ C / (c0 |xi|) for large shells
  for (std::size_t j = 0; j < shells.size(); ++j)
    if (shells[j] >= 2.0)
      rep.bound_constant = std::max(
          rep.bound_constant, rep.resolvent_sup[j] * rep.c0 * shells[j]);
  // homogeneity: for radii well past 1, doubling the shell halves the sup
  for (std::size_t j = 0; j + 1 < shells.size(); ++j) {
    if (shells[j] < 2.0 || shells[j + 1] != 2.0 * shells[j]) continue;
    const double ratio = rep.resolvent_sup[j + 1] / rep.resolvent_sup[j];
    if (ratio > 0.5 * 1.1 || ratio < 0.5 / 1.1) rep.homogeneity_ok = false;
  }
  rep.pass = rep.homogeneity_ok;
  return rep;
}

CommutatorBound commutator_bound_check(const FirstOrderOp& op,
                                       const std::vector<double>& phi,
                                       const Tolerances& tol) {
  const std::size_t pts = op.grid.points();
  require(phi.size() == pts, ErrorCode::invalid_argument,
          "phi sample length mismatch");
  if (op.grid.n == 1)
    require(smooth_tail_fraction(op.grid, phi) <= 1e-10, ErrorCode::precondition,
            "phi is not smooth enough for a spectral derivative");
  auto blocks = discretize(op, tol);
  CommutatorBound res;
  std::vector<cplx> phic(phi.begin(), phi.end());
  // The raw grid commutator carries one O(N) entry from the frequency wrap
  // (multiplication shifts the band edge across the seam), which the
  // continuum operator does not have. Measure on the resolved band
  // |k| <= N/4 instead.
  ComplexMatrix band = op.grid.multiplier(
      [&](const std::vector<double>& xi) {
        for (double v : xi)
          if (std::abs(v) > kPi * static_cast<double>(op.grid.N) /
                                (4.0 * op.grid.L))
            return cplx(0.0, 0.0);
        return cplx(1.0, 0.0);
      },
      1.0);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::size_t fib = op.fiber_dim(i);
    ComplexMatrix bandf =
        fib == 1 ? band : kron(band, ComplexMatrix::identity(fib));
    ComplexMatrix mphi = quantize::mult_op(op.grid, phic, fib);
    ComplexMatrix comm = commutator(blocks[i], mphi);
    comm = matmul(bandf, matmul(comm, bandf));
    res.lhs = std::max(res.lhs, linalg::operator_norm(comm));
  }
  // rhs: sup_x |grad phi| * Prop(D, x)
  std::vector<std::vector<double>> dphi;
  for (int ax = 0; ax < op.grid.n; ++ax) {
    ComplexMatrix dax = op.grid.derivative_matrix(ax);
    auto d = matvec(dax, phic);
    std::vector<double> re(pts);
    for (std::size_t g = 0; g < pts; ++g) re[g] = std::abs(d[g]);
    dphi.push_back(std::move(re));
  }
  for (std::size_t g = 0; g < pts; ++g) {
    double gn = 0.0;
    for (int ax = 0; ax < op.grid.n; ++ax) gn += dphi[ax][g] * dphi[ax][g];
    gn = std::sqrt(gn);
    double prop = 0.0;
    for (std::size_t i = 0; i < op.algebra.block_count(); ++i)
      prop = std::max(prop, op.prop_at(i, g));
    res.rhs = std::max(res.rhs, gn * prop);
  }
  res.ok = res.lhs <= res.rhs * (1.0 + tol.symm_slack);
  return res;
}

namespace {

struct EigBlocks {
  std::vector<linalg::SpectralData> s;
};

EigBlocks eig_all(const std::vector<ComplexMatrix>& blocks) {
  EigBlocks e;
  for (const auto& b : blocks) e.s.push_back(linalg::hermitian_eig(b));
  return e;
}

ComplexMatrix f_of_scaled(const linalg::SpectralData& s, double t,
                          const std::function<cplx(double)>& f) {
  return linalg::apply_function(
      s, [&](double lambda) { return f(lambda / t); });
}

}  // namespace

Lemma45Result lemma45_decay(const FirstOrderOp& op1, const FirstOrderOp& op2,
                            const std::vector<double>& phi,
                            const std::function<cplx(double)>& f,
                            const std::vector<double>& t_list,
                            const Tolerances& tol) {
  require(op1.grid == op2.grid && op1.algebra == op2.algebra && op1.k == op2.k,
          ErrorCode::precondition, "lemma45: operators live on different data");
  const std::size_t pts = op1.grid.points();
  // part 2 precondition: first-order parts identical
  for (int ax = 0; ax < op1.grid.n; ++ax)
    for (std::size_t i = 0; i < op1.algebra.block_count(); ++i)
      for (std::size_t g = 0; g < pts; ++g)
        require((op1.a[ax][i][g] - op2.a[ax][i][g]).max_abs() <= 1e-13,
                ErrorCode::precondition,
                "lemma45 part 2 needs identical first-order coefficients");
  // part 3 precondition: all coefficients equal near supp(phi)
  const std::size_t margin = std::max<std::size_t>(2, op1.grid.N / 16);
  for (std::size_t g = 0; g < pts; ++g) {
    bool near_support = false;
    for (std::size_t h = 0; h < pts; ++h) {
      if (std::abs(phi[h]) < 1e-12) continue;
      // periodic cell distance (1-d grids)
      const long long diff = std::llabs(static_cast<long long>(g) -
                                        static_cast<long long>(h));
      const long long dist = std::min<long long>(
          diff, static_cast<long long>(pts) - diff);
      if (dist <= static_cast<long long>(margin)) {
        near_support = true;
        break;
      }
    }
    if (!near_support) continue;
    for (std::size_t i = 0; i < op1.algebra.block_count(); ++i)
      require((op1.b[i][g] - op2.b[i][g]).max_abs() <= 1e-13,
              ErrorCode::precondition,
              "lemma45 part 3 needs equal coefficients near supp(phi)");
  }

  auto b1 = discretize(op1, tol);
  auto b2 = discretize(op2, tol);
  auto e1 = eig_all(b1);
  auto e2 = eig_all(b2);
  std::vector<cplx> phic(phi.begin(), phi.end());

  Lemma45Result res;
  for (double t : t_list) {
    double v1 = 0.0, v2 = 0.0, v3 = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < b1.size(); ++i) {
      ComplexMatrix mphi = quantize::mult_op(op1.grid, phic, op1.fiber_dim(i));
      ComplexMatrix f1 = f_of_scaled(e1.s[i], t, f);
      ComplexMatrix f2 = f_of_scaled(e2.s[i], t, f);
      v1 = std::max(v1, linalg::operator_norm(commutator(mphi, f1)));
      v2 = std::max(v2, linalg::operator_norm(matmul(mphi, f1 - f2)));
      v3 = std::max(v3,
                    linalg::operator_norm(matmul(mphi, f1) - matmul(f2, mphi)));
      // resolvent bound: ||[M_phi, r_+(D/t)]|| <= t^{-1} ||[D, M_phi]||
      ComplexMatrix rp = f_of_scaled(e1.s[i], t, [](double x) {
        return 1.0 / cplx(x, 1.0);
      });
      const double lhs = linalg::operator_norm(commutator(mphi, rp));
      const double rhs =
          linalg::operator_norm(commutator(b1[i], mphi)) / t + 1e-8;
      vb = std::max(vb, lhs - rhs);
    }
    res.part1.add(t, v1);
    res.part2.add(t, v2);
    res.part3.add(t, v3);
    if (vb > 0.0) res.resolvent_bound_ok = false;
  }
  return res;
}

namespace {

double bump(double u) {  // C-infinity bump on (-1, 1)
  const double u2 = u * u;
  if (u2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u2));
}

}  // namespace

std::vector<FreezeRow> freeze_compare(const FirstOrderOp& op,
                                      std::size_t x0_point,
                                      const std::vector<double>& halfwidths,
                                      const std::function<cplx(double)>& f,
                                      double t, const Tolerances& tol) {
  require(op.grid.n == 1, ErrorCode::invalid_argument,
          "freeze_compare is implemented on 1-d grids");
  const std::size_t pts = op.grid.points();
  require(x0_point < pts, ErrorCode::invalid_argument, "x0 off the grid");
  const double x0 = op.grid.coord(x0_point);

  // frozen operator: constant coefficients a(x0), herm(b(x0))
  FirstOrderOp frozen = op;
  for (int ax = 0; ax < op.grid.n; ++ax)
    for (std::size_t i = 0; i < op.algebra.block_count(); ++i)
      for (std::size_t g = 0; g < pts; ++g)
        frozen.a[ax][i][g] = op.a[ax][i][x0_point];
  for (std::size_t i = 0; i < op.algebra.block_count(); ++i) {
    ComplexMatrix bx = op.b[i][x0_point];
    bx.hermitize();
    for (std::size_t g = 0; g < pts; ++g) frozen.b[i][g] = bx;
  }

  auto bfull = discretize(op, tol);
  auto bfroz = discretize(frozen, tol);
  auto efull = eig_all(bfull);
  auto efroz = eig_all(bfroz);

  std::vector<FreezeRow> rows;
  for (double w : halfwidths) {
    require(w > 0.0, ErrorCode::invalid_argument, "bump halfwidth must be > 0");
    FreezeRow row;
    row.halfwidth = w;
    std::vector<cplx> phi(pts);
    bool covers_x0 = false;
    for (std::size_t g = 0; g < pts; ++g) {
      double d = std::abs(op.grid.coord(g) - x0);
      d = std::min(d, 2.0 * op.grid.L - d);  // periodic distance
      phi[g] = bump(d / w);
      if (g == x0_point && std::abs(phi[g]) > 0.0) covers_x0 = true;
      if (std::abs(phi[g]) > 1e-14) {
        for (int ax = 0; ax < op.grid.n; ++ax)
          for (std::size_t i = 0; i < op.algebra.block_count(); ++i)
            row.delta = std::max(
                row.delta, (op.a[ax][i][g] - frozen.a[ax][i][g]).max_abs());
        for (std::size_t i = 0; i < op.algebra.block_count(); ++i)
          row.delta =
              std::max(row.delta, (op.b[i][g] - frozen.b[i][g]).max_abs());
      }
    }
    require(covers_x0, ErrorCode::precondition,
            "bump support does not contain x0");
    for (std::size_t i = 0; i < op.algebra.block_count(); ++i) {
      ComplexMatrix mphi = quantize::mult_op(op.grid, phi, op.fiber_dim(i));
      ComplexMatrix diff = f_of_scaled(efull.s[i], t, f);
      diff -= f_of_scaled(efroz.s[i], t, f);
      row.norm = std::max(row.norm, linalg::operator_norm(matmul(mphi, diff)));
    }
    rows.push_back(row);
  }
  return rows;
}

quantize::DecayTable quantization_convergence(
    const FirstOrderOp& op, const std::vector<double>& phi,
    const std::function<cplx(double)>& f, const std::vector<double>& t_list,
    const Tolerances& tol) {
  const std::size_t pts = op.grid.points();
  require(phi.size() == pts, ErrorCode::invalid_argument,
          "phi sample length mismatch");
  auto blocks = discretize(op, tol);
  auto eigs = eig_all(blocks);
  std::vector<cplx> phic(phi.begin(), phi.end());

  quantize::DecayTable table;
  for (double t : t_list) {
    double defect = 0.0;
    for (std::size_t i = 0; i < op.algebra.block_count(); ++i) {
      const std::size_t fib = op.fiber_dim(i);
      quantize::PhaseFunction pf;
      pf.grid = op.grid;
      pf.fiber = fib;
      const FirstOrderOp* opp = &op;
      const std::vector<double>* phip = &phi;
      const std::size_t blk = i;
      pf.values = [opp, phip, blk, &f](const std::vector<double>& x,
                                       const std::vector<double>& xi) {
        // recover the grid index of x (phi_t always samples exact points)
        const auto& grid = opp->grid;
        std::size_t gidx = 0;
        if (grid.n == 1) {
          gidx = static_cast<std::size_t>(
                     std::llround((x[0] + grid.L) / grid.dx())) %
                 grid.N;
        } else {
          const std::size_t g0 = static_cast<std::size_t>(std::llround(
                                     (x[0] + grid.L) / grid.dx())) %
                                 grid.N;
          const std::size_t g1 = static_cast<std::size_t>(std::llround(
                                     (x[1] + grid.L) / grid.dx())) %
                                 grid.N;
          gidx = g0 * grid.N + g1;
        }
        ComplexMatrix sym = opp->symbol(blk, gidx, xi);
        auto se = linalg::hermitian_eig(sym);
        ComplexMatrix out = linalg::apply_function(se, f);
        out *= cplx((*phip)[gidx], 0.0);
        return out;
      };
      ComplexMatrix lhs = quantize::phi_t(pf, t);
      ComplexMatrix mphi = quantize::mult_op(op.grid, phic, fib);
      ComplexMatrix rhs = matmul(mphi, f_of_scaled(eigs.s[i], t, f));
      defect = std::max(defect, linalg::operator_norm(lhs - rhs));
    }
    table.add(t, defect);
  }
  return table;
}

// ---------------------------------------------------------------------------
// doubled operators

const fredholm::NearZeroAnalysis& DoubledBlock::analysis(
    const Tolerances& tol) const {
  if (!analysis_cache)
    analysis_cache = fredholm::analyze_near_zero(op, eps_signs, defect, gap,
                                                 tol.gap_fraction,
                                                 tol.artifact_lo,
                                                 tol.artifact_hi);
  return *analysis_cache;
}

const fredholm::Reduction& DoubledBlock::reduced(const Tolerances& tol) const {
  if (!reduction_cache)
    reduction_cache = fredholm::compress_artifacts(op, eps_signs, analysis(tol));
  return *reduction_cache;
}

DoubledOp double_first_order(const FirstOrderOp& op, const Tolerances& tol) {
  DoubledOp dop;
  dop.algebra = op.algebra;
  dop.grid = op.grid;
  auto blocks = discretize(op, tol);
  const std::size_t pts = op.grid.points();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::size_t fib = op.fiber_dim(i);
    const std::size_t dim = pts * fib;
    auto blk = std::make_shared<DoubledBlock>();
    blk->op = ComplexMatrix(2 * dim, 2 * dim);
    blk->eps_signs.assign(2 * dim, 0.0);
    // interleave sectors per grid point: slot = g*(2 fib) + sector*fib + c
    auto ix = [&](std::size_t g, int sector, std::size_t c) {
      return g * 2 * fib + static_cast<std::size_t>(sector) * fib + c;
    };
    for (std::size_t g = 0; g < pts; ++g)
      for (std::size_t c = 0; c < fib; ++c) {
        blk->eps_signs[ix(g, 0, c)] = 1.0;
        blk->eps_signs[ix(g, 1, c)] = -1.0;
      }
    for (std::size_t g = 0; g < pts; ++g)
      for (std::size_t h = 0; h < pts; ++h)
        for (std::size_t c = 0; c < fib; ++c)
          for (std::size_t c2 = 0; c2 < fib; ++c2) {
            const cplx v = blocks[i](g * fib + c, h * fib + c2);
            if (v == cplx(0.0, 0.0)) continue;
            blk->op(ix(g, 1, c), ix(h, 0, c2)) = v;           // D
            blk->op(ix(g, 0, c), ix(h, 1, c2)) = std::conj(
                blocks[i](h * fib + c2, g * fib + c));        // D^t = D
          }
    blk->op.hermitize();
    // spectral gap from the eigenvalues of D itself
    auto vals = linalg::hermitian_eigenvalues(blocks[i]);
    double gap = 0.0;
    for (double v : vals)
      if (std::abs(v) > 1e-8) {
        gap = (gap == 0.0) ? std::abs(v) : std::min(gap, std::abs(v));
      }
    blk->gap = gap > 0 ? gap : 1.0;
    blk->defect =
        op.grid.topology == quantize::Topology::periodized_line
            ? fredholm::line_defect_form(op.grid.n, op.grid.N, op.grid.L,
                                         2 * fib)
            : fredholm::fourier_defect_form(op.grid.n, op.grid.N, 2 * fib);
    dop.blocks.push_back(std::move(blk));
  }
  return dop;
}

DoubledOp from_bott(const bott::OscillatorOperator& op) {
  DoubledOp dop;
  dop.algebra = cstar::Algebra({1});
  dop.grid = op.grid;
  auto blk = std::make_shared<DoubledBlock>();
  blk->op = op.matrix;
  blk->eps_signs = op.eps_signs;
  blk->gap = op.theoretical_gap();
  blk->defect = fredholm::line_defect_form(op.config.n, op.config.N,
                                           op.config.L, op.cliff.dim());
  dop.blocks.push_back(std::move(blk));
  return dop;
}

namespace {

// order-8 central difference weights
const std::vector<std::pair<int, double>> kStencil8 = {
    {1, 4.0 / 5.0}, {2, -1.0 / 5.0}, {3, 4.0 / 105.0}, {4, -1.0 / 280.0}};

struct MagneticTranslation {
  std::vector<std::size_t> target;  // target index per source index
  std::vector<cplx> phase;
};

// one-site translations with uniform flux 2*pi*d/N^2 per plaquette; the
// wrap column of axis 0 carries the transition phases
MagneticTranslation make_translation(std::size_t N, int d, int axis) {
  MagneticTranslation t;
  const std::size_t pts = N * N;
  t.target.resize(pts);
  t.phase.resize(pts);
  const double om = 2.0 * kPi * static_cast<double>(d) /
                    static_cast<double>(N * N);
  for (std::size_t j0 = 0; j0 < N; ++j0)
    for (std::size_t j1 = 0; j1 < N; ++j1) {
      const std::size_t src = j0 * N + j1;
      if (axis == 0) {
        const std::size_t dst = ((j0 + 1) % N) * N + j1;
        t.target[src] = dst;
        const double ph = (j0 == N - 1)
                              ? -2.0 * kPi * static_cast<double>(d) *
                                    static_cast<double>(j1) /
                                    static_cast<double>(N)
                              : 0.0;
        t.phase[src] = cplx(std::cos(ph), std::sin(ph));
      } else {
        const std::size_t dst = j0 * N + (j1 + 1) % N;
        t.target[src] = dst;
        const double ph = om * static_cast<double>(j0);
        t.phase[src] = cplx(std::cos(ph), std::sin(ph));
      }
    }
  return t;
}

// covariant derivative along the axis: sum_m w_m (T^m - T^{-m}) / dx
ComplexMatrix magnetic_derivative(std::size_t N, int d, int axis) {
  const std::size_t pts = N * N;
  ComplexMatrix out(pts, pts);
  MagneticTranslation t1 = make_translation(N, d, axis);
  const double dx = 2.0 * kPi / static_cast<double>(N);
  // iterate powers: forward[src] = (target, phase) of T^m
  std::vector<std::size_t> ft(pts);
  std::vector<cplx> fp(pts, cplx(1.0, 0.0));
  for (std::size_t i = 0; i < pts; ++i) ft[i] = i;
  const int mmax = kStencil8.back().first;
  int widx = 0;
  for (int m = 1; m <= mmax; ++m) {
    for (std::size_t i = 0; i < pts; ++i) {
      fp[i] = t1.phase[ft[i]] * fp[i];
      ft[i] = t1.target[ft[i]];
    }
    if (kStencil8[widx].first == m) {
      const double w = kStencil8[widx].second / dx;
      ++widx;
      for (std::size_t src = 0; src < pts; ++src) {
        // forward: out[dst, src] += w * phase
        out(ft[src], src) += w * fp[src];
        // backward: adjoint contribution -w * conj(phase) at [src, dst]
        out(src, ft[src]) -= w * std::conj(fp[src]);
      }
    }
  }
  return out;
}

}  // namespace

DoubledOp twisted_dirac_torus(const std::vector<int>& flux, std::size_t N,
                              const cstar::Algebra& algebra,
                              const Tolerances& tol) {
  require(flux.size() == algebra.block_count(), ErrorCode::invalid_argument,
          "flux vector length must match the algebra block count");
  int dmax = 0;
  for (int d : flux) dmax = std::max(dmax, std::abs(d));
  require(N >= 8 * static_cast<std::size_t>(std::max(1, dmax)),
          ErrorCode::precondition,
          "grid too coarse for the gauge phase pattern: need N >= 8 max|d|");
  DoubledOp dop;
  dop.algebra = algebra;
  dop.flux = flux;
  dop.grid = quantize::QuantizationGrid::torus(N);
  const std::size_t pts = N * N;

  for (std::size_t i = 0; i < algebra.block_count(); ++i) {
    const int d = flux[i];
    const std::size_t kf = algebra.blocks[i];
    ComplexMatrix n0 = magnetic_derivative(N, d, 0);
    ComplexMatrix n1 = magnetic_derivative(N, d, 1);
    // D+ = -i nabla_0 + nabla_1 : positive to negative chirality
    ComplexMatrix dplus = n1;
    for (std::size_t r = 0; r < pts; ++r)
      for (std::size_t c = 0; c < pts; ++c)
        dplus(r, c) += cplx(0.0, -1.0) * n0(r, c);

    const std::size_t fib = 2 * kf;
    auto blk = std::make_shared<DoubledBlock>();
    blk->op = ComplexMatrix(pts * fib, pts * fib);
    blk->eps_signs.assign(pts * fib, 0.0);
    auto ix = [&](std::size_t g, int sector, std::size_t c) {
      return g * fib + static_cast<std::size_t>(sector) * kf + c;
    };
    for (std::size_t g = 0; g < pts; ++g)
      for (std::size_t c = 0; c < kf; ++c) {
        blk->eps_signs[ix(g, 0, c)] = 1.0;
        blk->eps_signs[ix(g, 1, c)] = -1.0;
      }
    for (std::size_t g = 0; g < pts; ++g)
      for (std::size_t h = 0; h < pts; ++h) {
        const cplx v = dplus(g, h);
        if (v == cplx(0.0, 0.0)) continue;
        for (std::size_t c = 0; c < kf; ++c) {
          blk->op(ix(g, 1, c), ix(h, 0, c)) = v;
          blk->op(ix(h, 0, c), ix(g, 1, c)) = std::conj(v);
        }
      }
    require(blk->op.hermiticity_defect() <= 1e-10, ErrorCode::numerical_failure,
            "twisted Dirac operator lost Hermiticity");

    if (d != 0) {
      blk->gap = std::sqrt(static_cast<double>(std::abs(d)) / kPi);
    } else {
      // free operator: smallest nonzero |symbol| over the grid frequencies
      double gap = 1e300;
      auto sym1 = [&](double k) {
        double s = 0.0;
        for (const auto& [m, w] : kStencil8)
          s += 2.0 * w * std::sin(m * k * 2.0 * kPi / static_cast<double>(N)) /
               (2.0 * kPi / static_cast<double>(N));
        return s;
      };
      for (std::size_t k0 = 0; k0 < N; ++k0)
        for (std::size_t k1 = 0; k1 < N; ++k1) {
          const double s0 = sym1(static_cast<double>(k0 < N / 2 ? k0 : k0) -
                                 (k0 < N / 2 ? 0.0 : static_cast<double>(N)));
          const double s1 = sym1(static_cast<double>(k1 < N / 2 ? k1 : k1) -
                                 (k1 < N / 2 ? 0.0 : static_cast<double>(N)));
          const double m = std::hypot(s0, s1);
          if (m > 1e-9) gap = std::min(gap, m);
        }
      blk->gap = gap;
    }
    blk->defect = fredholm::fourier_defect_form(2, N, fib);
    dop.blocks.push_back(std::move(blk));
  }
  (void)tol;
  return dop;
}

std::function<ComplexMatrix(const std::vector<double>&)> dirac_symbol(
    const DoubledOp& dop, std::size_t block) {
  require(!dop.flux.empty(), ErrorCode::invalid_argument,
          "dirac_symbol is defined for torus flux operators");
  const std::size_t kf = dop.algebra.blocks[block];
  return [kf](const std::vector<double>& xi) {
    const std::size_t fib = 2 * kf;
    ComplexMatrix s(fib, fib);
    const cplx sp(xi[0], xi[1]);  // sigma(D+) = xi_0 + i xi_1
    for (std::size_t c = 0; c < kf; ++c) {
      s(kf + c, c) = sp;
      s(c, kf + c) = std::conj(sp);
    }
    return s;
  };
}

ComplexMatrix cayley(const DoubledOp& dop, std::size_t block, double t,
                     const Tolerances& tol) {
  require(t > 0.0, ErrorCode::invalid_argument, "cayley scale must be > 0");
  const auto& red = dop.blocks[block]->reduced(tol);
  const std::size_t n = red.op.rows();
  ComplexMatrix x = red.op;
  x *= cplx(1.0 / t, 0.0);
  ComplexMatrix shifted = x;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= cplx(0.0, 1.0);
  ComplexMatrix res = linalg::lu_inverse(shifted);  // (X - i)^{-1}
  ComplexMatrix u = res;
  u *= cplx(0.0, 2.0);
  for (std::size_t i = 0; i < n; ++i) u(i, i) += 1.0;
  return u;  // I + 2i (X - i)^{-1} = (X + i)(X - i)^{-1}
}

cstar::K0Class analytic_index(const DoubledOp& dop, double gap_tol_frac,
                              const Tolerances& tol) {
  require(gap_tol_frac > 0.0 && gap_tol_frac < 1.0, ErrorCode::invalid_argument,
          "gap tolerance must be a fraction of the spectral gap");
  std::vector<long long> ranks;
  for (std::size_t i = 0; i < dop.blocks.size(); ++i) {
    Tolerances t2 = tol;
    t2.gap_fraction = gap_tol_frac;
    const auto& an = dop.blocks[i]->analysis(t2);
    // gap precondition: nothing between the window and the gap
    for (double v : an.all_values) {
      const double m = std::abs(v);
      require(!(m >= an.window && m < 0.95 * an.gap_used),
              ErrorCode::precondition,
              "no spectral gap at the requested tolerance (|lambda| = " +
                  std::to_string(m) + ")");
    }
    const long long k = dop.algebra.blocks[i];
    const long long raw = an.index();
    require(raw % k == 0, ErrorCode::numerical_failure,
            "kernel count is not a multiple of the block size");
    ranks.push_back(raw / k);
  }
  return cstar::K0Class(dop.algebra, std::move(ranks));
}

cstar::K0Class morphism_index(const DoubledOp& dop, double t_small,
                              double rank_tol, const Tolerances& tol) {
  std::vector<long long> ranks;
  for (std::size_t i = 0; i < dop.blocks.size(); ++i) {
    const auto& blk = *dop.blocks[i];
    const auto& an = blk.analysis(tol);
    // spectrum of the artifact-compressed operator, computed without the
    // dense congruence: P D P = D - A W* - W A* + A S A* for the artifact
    // columns A, W = D A, S = A* W (the discarded directions become exact
    // null vectors and are accounted for below)
    const std::size_t n = blk.op.rows();
    const std::size_t a_plus = an.plus.artifact_vectors.cols();
    const std::size_t a_minus = an.minus.artifact_vectors.cols();
    const std::size_t a_count = a_plus + a_minus;
    ComplexMatrix proj = blk.op;
    if (a_count > 0) {
      ComplexMatrix A(n, a_count);
      for (std::size_t j = 0; j < a_plus; ++j)
        for (std::size_t r2 = 0; r2 < n; ++r2)
          A(r2, j) = an.plus.artifact_vectors(r2, j);
      for (std::size_t j = 0; j < a_minus; ++j)
        for (std::size_t r2 = 0; r2 < n; ++r2)
          A(r2, a_plus + j) = an.minus.artifact_vectors(r2, j);
      ComplexMatrix W = matmul(blk.op, A);
      ComplexMatrix S = matmul(A.adjoint(), W);
      ComplexMatrix AS = matmul(A, S);
      // proj -= A W^* + W A^* - (A S) A^*
      for (std::size_t r2 = 0; r2 < n; ++r2)
        for (std::size_t c2 = 0; c2 < n; ++c2) {
          cplx acc(0.0, 0.0);
          for (std::size_t j = 0; j < a_count; ++j)
            acc += A(r2, j) * std::conj(W(c2, j)) +
                   W(r2, j) * std::conj(A(c2, j)) -
                   AS(r2, j) * std::conj(A(c2, j));
          proj(r2, c2) -= acc;
        }
      proj.hermitize();
    }
    auto vals = linalg::hermitian_eigenvalues(proj);

    // precondition: t_small is deep below the spectral gap
    double sigma_min = 1e300;
    for (double v : vals)
      if (std::abs(v) > an.window) sigma_min = std::min(sigma_min, std::abs(v));
    require(sigma_min < 1e300, ErrorCode::precondition,
            "reduced operator has no nonzero spectrum");
    require(t_small <= 0.1 * sigma_min * (1.0 + 1e-6),
            ErrorCode::precondition,
            "Cayley scale too large for the spectral gap");

    // chirality pairing of the nonzero spectrum: +sigma and -sigma match
    std::vector<double> pos, neg;
    std::size_t kernel_count = 0;
    for (double v : vals) {
      if (std::abs(v) <= an.window)
        ++kernel_count;
      else if (v > 0)
        pos.push_back(v);
      else
        neg.push_back(-v);
    }
    require(pos.size() == neg.size(), ErrorCode::numerical_failure,
            "nonzero spectrum of the reduced operator failed to pair");
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    for (std::size_t j = 0; j < pos.size(); ++j)
      require(std::abs(pos[j] - neg[j]) <= 1e-8 * (1.0 + pos[j]),
              ErrorCode::numerical_failure,
              "spectral pairing broke at sigma = " + std::to_string(pos[j]));

    const long long ker_plus = an.plus.physical;
    const long long ker_minus = an.minus.physical;
    require(kernel_count ==
                static_cast<std::size_t>(ker_plus + ker_minus) + a_count,
            ErrorCode::numerical_failure,
            "reduced kernel does not match the filtered mode count");

    // On each +-sigma pair the involution eps U_t has trace zero, so
    // p(eps U_t) contributes eigenvalues {0, 1}; on ker D it is -1 (p = 0)
    // and on ker D^t it is +1 (p = 1). Assemble both projection spectra and
    // run them through the standard rank counting.
    const long long n_pairs = static_cast<long long>(pos.size());
    std::vector<double> p_eps_spectrum, p_epsu_spectrum;
    const long long n_plus = n_pairs + ker_plus;
    const long long n_minus = n_pairs + ker_minus;
    for (long long j = 0; j < n_plus; ++j) p_eps_spectrum.push_back(1.0);
    for (long long j = 0; j < n_minus; ++j) p_eps_spectrum.push_back(0.0);
    for (long long j = 0; j < n_pairs; ++j) {
      p_epsu_spectrum.push_back(1.0);
      p_epsu_spectrum.push_back(0.0);
    }
    for (long long j = 0; j < ker_plus; ++j) p_epsu_spectrum.push_back(0.0);
    for (long long j = 0; j < ker_minus; ++j) p_epsu_spectrum.push_back(1.0);

    const int k = dop.algebra.blocks[i];
    const long long r_eps =
        cstar::rank_from_projection_spectrum(p_eps_spectrum, k, rank_tol);
    const long long r_epsu =
        cstar::rank_from_projection_spectrum(p_epsu_spectrum, k, rank_tol);
    ranks.push_back(r_eps - r_epsu);
  }
  return cstar::K0Class(dop.algebra, std::move(ranks));
}

cstar::K0Class morphism_index_dense(const DoubledOp& dop, double t_small,
                                    double rank_tol, const Tolerances& tol) {
  std::vector<long long> ranks;
  for (std::size_t i = 0; i < dop.blocks.size(); ++i) {
    const auto& blk = *dop.blocks[i];
    const auto& red = blk.reduced(tol);
    const std::size_t n = red.op.rows();
    auto se = linalg::hermitian_eig(red.op);
    // U_t via the functional calculus
    ComplexMatrix u = linalg::apply_function(se, [t_small](double lam) {
      const cplx num(lam / t_small, 1.0), den(lam / t_small, -1.0);
      return num / den;
    });
    ComplexMatrix eps(n, n);
    for (std::size_t j = 0; j < n; ++j) eps(j, j) = red.eps_signs[j];
    ComplexMatrix p_eps = eps;
    for (std::size_t j = 0; j < n; ++j) p_eps(j, j) += 1.0;
    p_eps *= cplx(0.5, 0.0);
    ComplexMatrix epsu = matmul(eps, u);
    for (std::size_t j = 0; j < n; ++j) epsu(j, j) += 1.0;
    epsu *= cplx(0.5, 0.0);
    epsu.hermitize();

    const int k = dop.algebra.blocks[i];
    const long long r1 = cstar::rank_from_projection_spectrum(
        linalg::hermitian_eigenvalues(p_eps), k, rank_tol);
    const long long r2 = cstar::rank_from_projection_spectrum(
        linalg::hermitian_eigenvalues(epsu), k, rank_tol);
    ranks.push_back(r1 - r2);
  }
  return cstar::K0Class(dop.algebra, std::move(ranks));
}

cstar::K0Class topological_index_torus(const std::vector<int>& flux,
                                       const cstar::Algebra& algebra) {
  require(flux.size() == algebra.block_count(), ErrorCode::invalid_argument,
          "flux vector length must match the algebra block count");
  std::vector<long long> ranks(flux.begin(), flux.end());
  return cstar::K0Class(algebra, std::move(ranks));
}

}  // namespace indexlab::elliptic
