#include "indexlab/bott.hpp"

#include <algorithm>
#include <cmath>

namespace indexlab::bott {

void OscillatorConfig::validate() const {
  require(n == 1 || n == 2, ErrorCode::invalid_argument,
          "oscillator dimension must be 1 or 2");
  require(t > 0.0, ErrorCode::invalid_argument, "scale t must be > 0");
  require(N >= 16 && (N & (N - 1)) == 0, ErrorCode::invalid_argument,
          "grid size must be a power of two >= 16");
  require(L >= 6.0 / std::sqrt(t), ErrorCode::invalid_argument,
          "box half-width too small: need L >= 6/sqrt(t)");
  require(std::abs(potential_sign) == 1.0, ErrorCode::invalid_argument,
          "potential sign must be +-1");
}

double OscillatorOperator::theoretical_gap() const {
  return std::sqrt(2.0 / config.t);
}

const fredholm::NearZeroAnalysis& OscillatorOperator::analysis(
    const Tolerances& tol) const {
  if (!analysis_) {
    auto defect = fredholm::line_defect_form(config.n, config.N, config.L,
                                             cliff.dim());
    analysis_ = fredholm::analyze_near_zero(
        matrix, eps_signs, defect, theoretical_gap(), tol.gap_fraction,
        tol.artifact_lo, tol.artifact_hi);
  }
  return *analysis_;
}

const fredholm::Reduction& OscillatorOperator::reduced(
    const Tolerances& tol) const {
  if (!reduced_) {
    reduced_ = fredholm::compress_artifacts(matrix, eps_signs, analysis(tol));
  }
  return *reduced_;
}

OscillatorOperator build_bott(const OscillatorConfig& config,
                              const Tolerances& tol) {
  config.validate();
  OscillatorOperator op;
  op.config = config;
  op.cliff = clifford::build_clifford(config.n);
  op.grid = quantize::QuantizationGrid(config.n, config.N, config.L,
                                       quantize::Topology::periodized_line);
  const std::size_t pts = op.grid.points();
  const std::size_t fib = op.cliff.dim();
  const std::size_t dim = pts * fib;
  op.matrix = ComplexMatrix(dim, dim);

  // derivative part: t^{-1} (d_j - d_j^*) (x) del_j
  for (int ax = 0; ax < config.n; ++ax) {
    ComplexMatrix dax = op.grid.derivative_matrix(ax);
    ComplexMatrix fj = op.cliff.d[ax] - op.cliff.dstar[ax];
    for (std::size_t g = 0; g < pts; ++g)
      for (std::size_t h = 0; h < pts; ++h) {
        const cplx dv = dax(g, h) * (1.0 / config.t);
        if (dv == cplx(0.0, 0.0)) continue;
        for (std::size_t s = 0; s < fib; ++s)
          for (std::size_t s2 = 0; s2 < fib; ++s2) {
            const cplx fv = fj(s, s2);
            if (fv != cplx(0.0, 0.0))
              op.matrix(g * fib + s, h * fib + s2) += dv * fv;
          }
      }
  }
  // potential part: sign * sum_j x_j (d_j + d_j^*), pointwise in x
  for (std::size_t g = 0; g < pts; ++g) {
    const auto x = op.grid.point_at(g);
    for (int ax = 0; ax < config.n; ++ax) {
      const double xv = config.potential_sign * x[ax];
      if (xv == 0.0) continue;
      for (std::size_t s = 0; s < fib; ++s)
        for (std::size_t s2 = 0; s2 < fib; ++s2) {
          const cplx gv = op.cliff.d[ax](s, s2) + op.cliff.dstar[ax](s, s2);
          if (gv != cplx(0.0, 0.0))
            op.matrix(g * fib + s, g * fib + s2) += xv * gv;
        }
    }
  }

  op.eps_signs.resize(dim);
  const auto fib_signs = op.cliff.epsilon_signs();
  for (std::size_t g = 0; g < pts; ++g)
    for (std::size_t s = 0; s < fib; ++s)
      op.eps_signs[g * fib + s] = fib_signs[s];

  require(op.matrix.hermiticity_defect() <= 1e-10, ErrorCode::numerical_failure,
          "oscillator operator lost Hermiticity");
  // eps anticommutation: entries with equal grading signs must vanish
  double anti = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      if (op.eps_signs[i] == op.eps_signs[j])
        anti = std::max(anti, std::abs(op.matrix(i, j)));
  require(anti <= 1e-10 * std::max(1.0, op.matrix.max_abs()),
          ErrorCode::numerical_failure,
          "oscillator operator does not anticommute with the grading");
  (void)tol;
  return op;
}

std::vector<double> bott_spectrum(const OscillatorOperator& op,
                                  std::size_t count, const Tolerances& tol) {
  require(count <= op.matrix.rows(), ErrorCode::invalid_argument,
          "requested more eigenvalues than the matrix dimension");
  auto spec = fredholm::physical_spectrum(op.matrix, op.analysis(tol));
  std::sort(spec.begin(), spec.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  spec.resize(std::min(count, spec.size()));
  return spec;
}

long long bott_index(const OscillatorOperator& op, double gap_tol,
                     const Tolerances& tol) {
  const auto& an = op.analysis(tol);
  // spectral-gap precondition: no eigenvalue magnitude in [gap_tol, 10 gap_tol)
  for (double v : an.all_values) {
    const double m = std::abs(v);
    require(!(m >= gap_tol && m < 10.0 * gap_tol), ErrorCode::precondition,
            "spectral gap violated at |lambda| = " + std::to_string(m));
  }
  for (double v : an.window_values)
    require(std::abs(v) < gap_tol, ErrorCode::precondition,
            "near-zero window extends past gap_tol");
  return an.index();
}

KernelReport bott_kernel_report(const OscillatorOperator& op,
                                const Tolerances& tol) {
  require(op.config.n == 1, ErrorCode::invalid_argument,
          "kernel report implemented for n = 1");
  const auto& an = op.analysis(tol);
  KernelReport rep;
  rep.near_zero_count =
      static_cast<std::size_t>(an.plus.physical + an.minus.physical);
  require(rep.near_zero_count >= 1, ErrorCode::numerical_failure,
          "no physical kernel mode found");
  const ComplexMatrix& vecs = an.plus.physical > 0 ? an.plus.physical_vectors
                                                   : an.minus.physical_vectors;
  const std::size_t pts = op.grid.points();
  const std::size_t fib = op.cliff.dim();
  std::vector<cplx> v(op.matrix.rows());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = vecs(i, 0);
  auto av = matvec(op.matrix, v);
  cplx ray(0.0, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) ray += std::conj(v[i]) * av[i];
  rep.eigenvalue = ray.real();

  // 0-form weight (fiber slot of the empty set = index 0 in graded-lex order)
  double w0 = 0.0, wtot = 0.0;
  for (std::size_t g = 0; g < pts; ++g) {
    w0 += std::norm(v[g * fib + 0]);
    for (std::size_t s = 0; s < fib; ++s) wtot += std::norm(v[g * fib + s]);
  }
  rep.zero_form_weight = w0 / wtot;

  // least-squares fit of log|v_0(x)| = c - gamma x^2 over the well-resolved
  // central region
  double sx2 = 0, sx4 = 0, sy = 0, sx2y = 0, syy = 0;
  std::size_t cnt = 0;
  double peak = 0.0;
  for (std::size_t g = 0; g < pts; ++g)
    peak = std::max(peak, std::abs(v[g * fib]));
  for (std::size_t g = 0; g < pts; ++g) {
    const double x = op.grid.coord(g);
    const double a = std::abs(v[g * fib]);
    if (a < 1e-6 * peak || std::abs(x) > 3.0 / std::sqrt(op.config.t)) continue;
    const double y = std::log(a);
    const double x2 = x * x;
    sx2 += x2;
    sx4 += x2 * x2;
    sy += y;
    sx2y += x2 * y;
    syy += y * y;
    ++cnt;
  }
  require(cnt >= 8, ErrorCode::numerical_failure,
          "kernel mode has too few resolved samples for a width fit");
  const double nn = static_cast<double>(cnt);
  const double denom = nn * sx4 - sx2 * sx2;
  rep.gaussian_gamma = -(nn * sx2y - sx2 * sy) / denom;
  const double num = nn * sx2y - sx2 * sy;
  const double d2 = denom * (nn * syy - sy * sy);
  rep.gaussian_fit_r2 = d2 > 0 ? num * num / d2 : 1.0;
  return rep;
}

ComplexMatrix thom_point_value(const clifford::CliffordRep& rep,
                               const std::function<cplx(double)>& f, double x,
                               const std::vector<double>& v,
                               const std::vector<double>& xi) {
  ComplexMatrix m = clifford::clifford_c(rep, v, xi);
  ComplexMatrix ex = rep.epsilon;
  ex *= cplx(x, 0.0);
  m += ex;
  auto s = linalg::hermitian_eig(m);
  return linalg::apply_function(s, f);
}

ThomPointTable thom_point_map(const clifford::CliffordRep& rep,
                              const std::function<cplx(double)>& f,
                              const std::vector<double>& x_samples,
                              const std::vector<double>& radii,
                              const Tolerances& tol) {
  require(!radii.empty(), ErrorCode::invalid_argument,
          "thom_point_map needs at least one phase-space radius");
  ThomPointTable out;
  const int n = rep.n;
  for (double r : radii) {
    double sup = 0.0;
    // sample directions: coordinate axes and diagonals in (v, xi)
    std::vector<std::pair<std::vector<double>, std::vector<double>>> dirs;
    for (int j = 0; j < n; ++j) {
      std::vector<double> v(n, 0.0), xi(n, 0.0);
      v[j] = r;
      dirs.push_back({v, xi});
      v[j] = 0.0;
      xi[j] = r;
      dirs.push_back({v, xi});
      v[j] = r / std::sqrt(2.0);
      xi[j] = r / std::sqrt(2.0);
      dirs.push_back({v, xi});
    }
    for (double x : x_samples)
      for (const auto& [v, xi] : dirs)
        sup = std::max(sup,
                       linalg::operator_norm(thom_point_value(rep, f, x, v, xi)));
    out.radii.push_back(r);
    out.sup_norm.push_back(sup);
  }
  out.decay_sup = out.sup_norm.back();
  require(out.decay_sup <=
              std::max(tol.boundary_eta, 1e-3 * (out.sup_norm.front() + 1e-30)),
          ErrorCode::precondition,
          "function does not vanish at infinity on the sampled range");
  return out;
}

quantize::DecayTable homotopy_b20(const OscillatorOperator& op,
                                  const std::function<cplx(double)>& f,
                                  double support_radius,
                                  const std::vector<double>& x_samples,
                                  const std::vector<double>& s_list,
                                  const Tolerances& tol) {
  require(support_radius > 0.0, ErrorCode::invalid_argument,
          "homotopy_b20 needs the support radius of f");
  const auto& red = op.reduced(tol);
  const std::size_t dim = red.op.rows();

  // kernel projection of the reduced operator
  auto pe = linalg::hermitian_eig_in_window(
      red.op, -tol.gap_fraction * op.theoretical_gap(),
      tol.gap_fraction * op.theoretical_gap());
  ComplexMatrix proj(dim, dim);
  for (std::size_t j = 0; j < pe.vectors.cols(); ++j)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t i2 = 0; i2 < dim; ++i2)
        proj(i, i2) += pe.vectors(i, j) * std::conj(pe.vectors(i2, j));

  quantize::DecayTable table;
  for (double s : s_list) {
    require(s > 0.0, ErrorCode::invalid_argument, "homotopy scale must be > 0");
    double sup = 0.0;
    for (double x : x_samples) {
      ComplexMatrix m = red.op;
      m *= cplx(1.0 / s, 0.0);
      for (std::size_t i = 0; i < dim; ++i)
        m(i, i) += red.eps_signs[i] * x;
      auto se = linalg::hermitian_eig(m);
      ComplexMatrix fm = linalg::apply_function(se, f);
      ComplexMatrix target = proj;
      target *= f(x);
      sup = std::max(sup, linalg::operator_norm(fm - target));
    }
    table.add(s, sup);
  }
  return table;
}

double alpha_isometry(double t, int n, std::size_t quad_points, double quad_L) {
  require(t > 0.0, ErrorCode::invalid_argument, "alpha_isometry: t must be > 0");
  require(n == 1 || n == 2, ErrorCode::invalid_argument,
          "alpha_isometry: n must be 1 or 2");
  require(quad_points >= 32, ErrorCode::invalid_argument,
          "quadrature grid too coarse");
  // integrand of the squared norm: (2t/pi)^{n/2} e^{-2t |v|^2}
  const double boundary = std::exp(-2.0 * t * quad_L * quad_L);
  require(boundary < 1e-12, ErrorCode::precondition,
          "quadrature box too small for the Gaussian");
  const double dx = 2.0 * quad_L / static_cast<double>(quad_points);
  const double pref = std::pow(2.0 * t / kPi, static_cast<double>(n) / 2.0);
  double total = 0.0;
  if (n == 1) {
    for (std::size_t j = 0; j < quad_points; ++j) {
      const double x = -quad_L + dx * (static_cast<double>(j) + 0.5);
      total += std::exp(-2.0 * t * x * x) * dx;
    }
  } else {
    for (std::size_t j = 0; j < quad_points; ++j) {
      const double x = -quad_L + dx * (static_cast<double>(j) + 0.5);
      for (std::size_t k = 0; k < quad_points; ++k) {
        const double y = -quad_L + dx * (static_cast<double>(k) + 0.5);
        total += std::exp(-2.0 * t * (x * x + y * y)) * dx * dx;
      }
    }
  }
  return std::sqrt(pref * total);
}

}  // namespace indexlab::bott
