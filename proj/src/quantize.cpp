#include "indexlab/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "indexlab/linalg.hpp"

namespace indexlab::quantize {

PhaseFunction PhaseFunction::scalar(
    const QuantizationGrid& grid,
    const std::function<cplx(const std::vector<double>&,
                             const std::vector<double>&)>& f,
    bool self_adjoint) {
  PhaseFunction p;
  p.grid = grid;
  p.fiber = 1;
  p.self_adjoint = self_adjoint;
  p.values = [f](const std::vector<double>& x, const std::vector<double>& xi) {
    ComplexMatrix m(1, 1);
    m(0, 0) = f(x, xi);
    return m;
  };
  return p;
}

double PhaseFunction::boundary_sup(double t) const {
  const std::size_t m = grid.points();
  double worst = 0.0;
  // outer frequency shell: any axis at max |frequency|
  double ximax = 0.0;
  for (std::size_t k = 0; k < grid.N; ++k)
    ximax = std::max(ximax, std::abs(grid.freq(k)));
  for (std::size_t a = 0; a < m; ++a) {
    const auto x = grid.point_at(a);
    for (std::size_t k = 0; k < m; ++k) {
      auto xi = grid.freq_at(k);
      bool outer = false;
      for (double c : xi) outer |= std::abs(c) >= ximax - 1e-12;
      if (!outer) continue;
      for (auto& c : xi) c /= t;
      worst = std::max(worst, values(x, xi).max_abs());
    }
    if (grid.topology != Topology::periodized_line) continue;
    // spatial boundary shell for the periodized-line surrogate of R^n
    bool bnd = false;
    for (double c : x) bnd |= std::abs(c) >= grid.L * (1.0 - 2.0 / grid.N);
    if (bnd) {
      std::vector<double> xi0(grid.n, 0.0);
      worst = std::max(worst, values(x, xi0).max_abs());
    }
  }
  return worst;
}

void PhaseFunction::validate_c0(double eta) const {
  const double sup = boundary_sup(1.0);
  require(sup <= eta, ErrorCode::precondition,
          "phase function is not C0 at the boundary shell: sup = " +
              std::to_string(sup));
}

double PhaseFunction::self_adjoint_defect() const {
  const std::size_t m = grid.points();
  double worst = 0.0;
  // coarse sample: every 3rd point in x and xi keeps this O(m^2/9)
  for (std::size_t a = 0; a < m; a += 3) {
    const auto x = grid.point_at(a);
    for (std::size_t k = 0; k < m; k += 3) {
      const auto xi = grid.freq_at(k);
      ComplexMatrix v = values(x, xi);
      worst = std::max(worst, (v - v.adjoint()).max_abs());
    }
  }
  return worst;
}

ComplexMatrix mult_op(const QuantizationGrid& grid,
                      const std::vector<cplx>& samples, std::size_t fiber) {
  const std::size_t m = grid.points();
  require(samples.size() == m, ErrorCode::invalid_argument,
          "mult_op: sample length mismatch");
  ComplexMatrix out(m * fiber, m * fiber);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t s = 0; s < fiber; ++s)
      out(a * fiber + s, a * fiber + s) = samples[a];
  return out;
}

ComplexMatrix mult_op(const QuantizationGrid& grid,
                      const std::vector<ComplexMatrix>& samples) {
  const std::size_t m = grid.points();
  require(samples.size() == m, ErrorCode::invalid_argument,
          "mult_op: sample length mismatch");
  const std::size_t fiber = samples[0].rows();
  ComplexMatrix out(m * fiber, m * fiber);
  for (std::size_t a = 0; a < m; ++a) {
    require(samples[a].rows() == fiber && samples[a].cols() == fiber,
            ErrorCode::invalid_argument, "mult_op: ragged fiber samples");
    for (std::size_t s = 0; s < fiber; ++s)
      for (std::size_t s2 = 0; s2 < fiber; ++s2)
        out(a * fiber + s, a * fiber + s2) = samples[a](s, s2);
  }
  return out;
}

ComplexMatrix conv_op(const QuantizationGrid& grid,
                      const std::function<cplx(const std::vector<double>&)>& g,
                      double t, std::size_t fiber) {
  ComplexMatrix scalar = grid.multiplier(g, t);
  if (fiber == 1) return scalar;
  return kron(scalar, ComplexMatrix::identity(fiber));
}

ComplexMatrix conv_op_matrix(
    const QuantizationGrid& grid,
    const std::function<ComplexMatrix(const std::vector<double>&)>& g, double t,
    std::size_t fiber) {
  const std::size_t m = grid.points();
  ComplexMatrix w = grid.fourier_matrix();
  ComplexMatrix out(m * fiber, m * fiber);
  // W* diag(g(xi/t)) W acting blockwise: assemble per fiber pair
  for (std::size_t s = 0; s < fiber; ++s)
    for (std::size_t s2 = 0; s2 < fiber; ++s2) {
      ComplexMatrix wd = w;
      for (std::size_t k = 0; k < m; ++k) {
        auto xi = grid.freq_at(k);
        for (auto& c : xi) c /= t;
        const cplx gv = g(xi)(s, s2);
        for (std::size_t j = 0; j < m; ++j) wd(k, j) *= gv;
      }
      ComplexMatrix blk = matmul(w.adjoint(), wd);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          out(a * fiber + s, b * fiber + s2) = blk(a, b);
    }
  return out;
}

ComplexMatrix phi_t(const PhaseFunction& f, double t) {
  require(t > 0.0, ErrorCode::invalid_argument, "phi_t: scale must be > 0");
  const QuantizationGrid& grid = f.grid;
  const std::size_t m = grid.points();
  const std::size_t fiber = f.fiber;
  ComplexMatrix w = grid.fourier_matrix();
  ComplexMatrix wadj = w.adjoint();

  // sample F at (x_a, xi_k / t)
  std::vector<ComplexMatrix> fs(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    const auto x = grid.point_at(a);
    for (std::size_t k = 0; k < m; ++k) {
      auto xi = grid.freq_at(k);
      for (auto& c : xi) c /= t;
      fs[a * m + k] = f.values(x, xi);
      require(fs[a * m + k].rows() == fiber && fs[a * m + k].cols() == fiber,
              ErrorCode::invalid_argument, "phase function fiber mismatch");
    }
  }

  // per fiber pair: Phi = (W^* hadamard F) * W
  ComplexMatrix out(m * fiber, m * fiber);
  ComplexMatrix had(m, m);
  for (std::size_t s = 0; s < fiber; ++s)
    for (std::size_t s2 = 0; s2 < fiber; ++s2) {
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t k = 0; k < m; ++k)
          had(a, k) = wadj(a, k) * fs[a * m + k](s, s2);
      ComplexMatrix blk = matmul(had, w);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          out(a * fiber + s, b * fiber + s2) = blk(a, b);
    }
  return out;
}

std::vector<ComplexMatrix> phi_A_t(const BlockPhaseFunction& f, double t) {
  require(f.block.size() == f.algebra.block_count(), ErrorCode::invalid_argument,
          "phi_A_t: one symbol per algebra block required");
  std::vector<ComplexMatrix> out;
  out.reserve(f.block.size());
  for (const auto& blk : f.block) out.push_back(phi_t(blk, t));
  return out;
}

bool DecayTable::nonincreasing(double slack) const {
  for (std::size_t i = 1; i < value.size(); ++i)
    if (value[i] > value[i - 1] + slack) return false;
  return true;
}

double DecayTable::loglog_slope(double* intercept, double* r2) const {
  require(t.size() >= 4, ErrorCode::precondition,
          "need at least 4 points to fit a slope");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double lx = std::log(t[i]);
    const double ly = std::log(std::max(value[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  if (intercept) *intercept = (sy - slope * sx) / n;
  if (r2) {
    const double num = (n * sxy - sx * sy);
    const double d2 = denom * (n * syy - sy * sy);
    *r2 = d2 > 0 ? num * num / d2 : 1.0;
  }
  return slope;
}

CommutatorDecayResult commutator_decay(
    const QuantizationGrid& grid, const std::vector<cplx>& f_samples,
    const std::function<cplx(const std::vector<double>&)>& g,
    const std::vector<double>& t_list) {
  require(t_list.size() >= 4, ErrorCode::precondition,
          "commutator_decay needs at least 4 scales to fit a slope");
  CommutatorDecayResult res;
  ComplexMatrix mf = mult_op(grid, f_samples);

  // ||[D, M_f]|| for the resolvent bound rows
  ComplexMatrix d0(grid.points(), grid.points());
  for (int ax = 0; ax < grid.n; ++ax) {
    ComplexMatrix dax = grid.derivative_matrix(ax);
    dax *= cplx(0.0, -1.0);  // -i d/dx, the self-adjoint convention
    if (ax == 0)
      d0 = dax;
    else
      d0 += dax;
  }
  res.d_commutator_norm = linalg::operator_norm(commutator(d0, mf));

  std::vector<std::function<cplx(const std::vector<double>&)>> resolvents;
  for (double sign : {1.0, -1.0})
    resolvents.push_back([sign](const std::vector<double>& xi) {
      double s = 0.0;
      for (double c : xi) s += c;
      return 1.0 / cplx(s, sign);
    });

  for (double t : t_list) {
    ComplexMatrix ct = conv_op(grid, g, t);
    res.table.add(t, linalg::operator_norm(commutator(mf, ct)));
    const double rhs = res.d_commutator_norm / t;
    for (const auto& r : resolvents) {
      ComplexMatrix rt = conv_op(grid, r, t);
      const double lhs = linalg::operator_norm(commutator(mf, rt));
      res.worst_bound_margin = std::max(res.worst_bound_margin, lhs - rhs);
      if (lhs > rhs + 1e-8) res.resolvent_bound_ok = false;
    }
    res.table.bound.push_back(rhs);
  }
  res.slope = res.table.loglog_slope(&res.intercept, &res.r2);
  return res;
}

namespace {

// band-limited cardinal function of the grid: s_b(y) = (1/N) sum_k e^{i xi_k (y - x_b)}
cplx cardinal(const QuantizationGrid& grid, double y, std::size_t b) {
  cplx acc(0.0, 0.0);
  for (std::size_t k = 0; k < grid.N; ++k) {
    const double ph = grid.freq(k) * (y - grid.coord(b));
    acc += cplx(std::cos(ph), std::sin(ph));
  }
  return acc / static_cast<double>(grid.N);
}

}  // namespace

DiffeoResult diffeo_covariance(const QuantizationGrid& grid,
                               const PhaseFunction& f,
                               const std::function<double(double)>& psi,
                               const std::function<double(double)>& dpsi,
                               const std::vector<double>& t_list) {
  require(grid.n == 1, ErrorCode::invalid_argument,
          "diffeo_covariance is implemented on 1-d grids");
  require(f.fiber == 1, ErrorCode::invalid_argument,
          "diffeo_covariance expects a scalar symbol");
  const std::size_t m = grid.N;
  DiffeoResult res;
  res.jacobian_min = 1e300;
  for (std::size_t a = 0; a < m; ++a)
    res.jacobian_min = std::min(res.jacobian_min, dpsi(grid.coord(a)));
  require(res.jacobian_min > 0.0, ErrorCode::precondition,
          "diffeomorphism has a Jacobian sign change on the grid");

  // T_psi[a,b] = J^{1/2}(x_a) s_b(psi(x_a)) via spectral interpolation
  ComplexMatrix tpsi(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    const double xa = grid.coord(a);
    const double ja = std::sqrt(dpsi(xa));
    for (std::size_t b = 0; b < m; ++b)
      tpsi(a, b) = ja * cardinal(grid, psi(xa), b);
  }
  ComplexMatrix tpsi_inv = linalg::lu_inverse(tpsi);

  PhaseFunction fpull = f;
  auto base = f.values;
  fpull.values = [base, psi, dpsi](const std::vector<double>& x,
                                   const std::vector<double>& xi) {
    const std::vector<double> y{psi(x[0])};
    const std::vector<double> eta{xi[0] / dpsi(x[0])};
    return base(y, eta);
  };

  for (double t : t_list) {
    ComplexMatrix lhs = phi_t(fpull, t);
    ComplexMatrix rhs = matmul(tpsi, matmul(phi_t(f, t), tpsi_inv));
    res.table.add(t, linalg::operator_norm(lhs - rhs));
  }
  return res;
}

namespace {

double smoothstep5(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (u * (u * 6.0 - 15.0) + 10.0);
}

double angdist(double a, double b) {
  double d = std::fmod(a - b, 2.0 * kPi);
  if (d < -kPi) d += 2.0 * kPi;
  if (d > kPi) d -= 2.0 * kPi;
  return std::abs(d);
}

}  // namespace

std::vector<std::vector<double>> partition_of_unity(
    const QuantizationGrid& grid, const CircleCover& cover) {
  require(grid.topology == Topology::circle, ErrorCode::invalid_argument,
          "partition_of_unity expects a circle grid");
  const double sep = angdist(cover.center0, cover.center1);
  require(cover.overlap_half_width > 0.0 &&
              cover.overlap_half_width < sep,
          ErrorCode::invalid_argument, "cover arcs must overlap properly");
  std::vector<double> r0(grid.N), r1(grid.N);
  for (std::size_t j = 0; j < grid.N; ++j) {
    const double th = grid.coord(j);
    const double d0 = angdist(th, cover.center0);
    const double d1 = angdist(th, cover.center1);
    // ramp in the "belongs to arc 1" direction: rho0 = cos, rho1 = sin of a
    // smooth angle, so the squares sum to 1 exactly
    const double u = smoothstep5(0.5 + 0.5 * (d0 - d1) / cover.overlap_half_width);
    r0[j] = std::cos(0.5 * kPi * u);
    r1[j] = std::sin(0.5 * kPi * u);
  }
  return {r0, r1};
}

ComplexMatrix glued_phi(const QuantizationGrid& grid, const CircleCover& cover,
                        const PhaseFunction& f, double t) {
  require(grid.topology == Topology::circle, ErrorCode::invalid_argument,
          "glued_phi expects a circle grid");
  require(f.fiber == 1, ErrorCode::invalid_argument,
          "glued_phi expects a scalar symbol");
  auto rho = partition_of_unity(grid, cover);
  // validate the partition
  for (std::size_t j = 0; j < grid.N; ++j) {
    const double s = rho[0][j] * rho[0][j] + rho[1][j] * rho[1][j];
    require(std::abs(s - 1.0) <= 1e-10, ErrorCode::precondition,
            "partition of unity does not sum to 1");
  }
  const double centers[2] = {cover.center0, cover.center1};
  const std::size_t m = grid.N;
  ComplexMatrix out(m, m);
  for (int alpha = 0; alpha < 2; ++alpha) {
    // chart: rotate the arc center to 0; centers must be grid-aligned
    const double shift_cells_d = (centers[alpha] + grid.L) / grid.dx();
    const long long shift_cells = std::llround(shift_cells_d) -
                                  static_cast<long long>(m) / 2;
    require(std::abs(shift_cells_d - std::llround(shift_cells_d)) < 1e-9,
            ErrorCode::invalid_argument, "cover centers must be grid-aligned");
    // conjugate back: Phi_t(G o shift)[a - s, b - s] = Phi_t(G)[a, b]
    auto wrap = [&](long long j) {
      long long r = (j - shift_cells) % static_cast<long long>(m);
      if (r < 0) r += static_cast<long long>(m);
      return static_cast<std::size_t>(r);
    };
    // rotated symbol G(x, xi) = (rho_a F)(x + shift, xi)
    const auto& r = rho[alpha];
    auto base = f.values;
    const double shift_angle = static_cast<double>(shift_cells) * grid.dx();
    PhaseFunction g = f;
    const QuantizationGrid gr = grid;
    g.values = [base, r, gr, shift_angle](const std::vector<double>& x,
                                          const std::vector<double>& xi) {
      double y = x[0] + shift_angle;
      while (y >= gr.L) y -= 2.0 * gr.L;
      while (y < -gr.L) y += 2.0 * gr.L;
      const std::size_t j = static_cast<std::size_t>(
          std::llround((y + gr.L) / gr.dx())) % gr.N;
      ComplexMatrix v = base({gr.coord(j)}, xi);
      v *= cplx(r[j], 0.0);
      return v;
    };
    ComplexMatrix chart = phi_t(g, t);
    // conjugate back by the rotation permutation and multiply by M_rho
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        out(a, b) += chart(wrap(static_cast<long long>(a)),
                           wrap(static_cast<long long>(b))) *
                     r[b];
  }
  return out;
}

}  // namespace indexlab::quantize
