#pragma once

#include <functional>
#include <vector>

#include "indexlab/cstar.hpp"
#include "indexlab/grid.hpp"

namespace indexlab::quantize {

// Matrix-valued symbol F(x, xi) on phase space, supplied as a callable and
// sampled at the exact rescaled DFT frequencies xi_k / t (no interpolation).
struct PhaseFunction {
  QuantizationGrid grid;
  std::size_t fiber = 1;
  // x and xi are length-n coordinate vectors; result is fiber x fiber
  std::function<ComplexMatrix(const std::vector<double>&,
                              const std::vector<double>&)>
      values;
  bool self_adjoint = false;

  static PhaseFunction scalar(
      const QuantizationGrid& grid,
      const std::function<cplx(const std::vector<double>&,
                               const std::vector<double>&)>& f,
      bool self_adjoint = false);

  // sup ||F|| over the outer frequency shell (and, for periodized-line
  // grids, over the spatial boundary shell): the C0 surrogate check.
  double boundary_sup(double t = 1.0) const;
  void validate_c0(double eta) const;
  double self_adjoint_defect() const;  // sampled sup ||F - F*||
};

// Multiplication operator on grid (x) fiber vectors. Scalar overload makes
// a diagonal matrix, the matrix overload a pointwise block-diagonal one.
ComplexMatrix mult_op(const QuantizationGrid& grid,
                      const std::vector<cplx>& samples, std::size_t fiber = 1);
ComplexMatrix mult_op(const QuantizationGrid& grid,
                      const std::vector<ComplexMatrix>& samples);

// Rescaled Fourier multiplier C_t(g) = W* diag(g(xi/t)) W (x) fiber.
ComplexMatrix conv_op(const QuantizationGrid& grid,
                      const std::function<cplx(const std::vector<double>&)>& g,
                      double t, std::size_t fiber = 1);
ComplexMatrix conv_op_matrix(
    const QuantizationGrid& grid,
    const std::function<ComplexMatrix(const std::vector<double>&)>& g, double t,
    std::size_t fiber);

// Quantization of a general symbol: entry (a s, b s') is
//   (1/N^n) sum_k F(x_a, xi_k/t)[s,s'] e^{i xi_k (x_a - x_b)},
// which reduces to M_f C_t(g) exactly on elementary tensors f (x) g.
ComplexMatrix phi_t(const PhaseFunction& f, double t);

// Blockwise application over the algebra fibers.
struct BlockPhaseFunction {
  cstar::Algebra algebra;
  std::vector<PhaseFunction> block;  // one symbol per block
};
std::vector<ComplexMatrix> phi_A_t(const BlockPhaseFunction& f, double t);

// (t, value) table with the fit/monotonicity helpers the decay experiments
// share.
struct DecayTable {
  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> bound;  // optional per-t reference bound

  void add(double tt, double v) {
    t.push_back(tt);
    value.push_back(v);
  }
  double final_value() const { return value.empty() ? 0.0 : value.back(); }
  bool nonincreasing(double slack = 0.0) const;
  // least-squares slope of log(value) against log(t); r2 optional out
  double loglog_slope(double* intercept = nullptr, double* r2 = nullptr) const;
};

struct CommutatorDecayResult {
  DecayTable table;            // ||[M_f, C_t(g)]||
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double d_commutator_norm = 0.0;   // ||[D, M_f]||
  bool resolvent_bound_ok = true;   // ||[M_f, r_pm(D/t)]|| <= ||[D,M_f]||/t
  double worst_bound_margin = 0.0;  // max over t of lhs - rhs
};

CommutatorDecayResult commutator_decay(
    const QuantizationGrid& grid, const std::vector<cplx>& f_samples,
    const std::function<cplx(const std::vector<double>&)>& g,
    const std::vector<double>& t_list);

struct DiffeoResult {
  DecayTable table;
  double jacobian_min = 0.0;
};

// ||Phi_t(F o psi_hat) - T_psi Phi_t(F) T_psi^{-1}|| across t. psi acts on
// a 1-d grid; dpsi is its derivative (must stay positive on the grid).
DiffeoResult diffeo_covariance(const QuantizationGrid& grid,
                               const PhaseFunction& f,
                               const std::function<double(double)>& psi,
                               const std::function<double(double)>& dpsi,
                               const std::vector<double>& t_list);

// Two-arc cover of the circle: arcs centered at the given grid-aligned
// angles; the squared partition is built from a smoothstep ramp so that
// rho_1^2 + rho_2^2 = 1 holds to rounding.
struct CircleCover {
  double center0 = 0.0;
  double center1 = kPi;
  double overlap_half_width = 1.0;  // half-width of each transition zone
};

std::vector<std::vector<double>> partition_of_unity(
    const QuantizationGrid& grid, const CircleCover& cover);

// Glued quantization sum_a Phi^a_t(rho_a F) M_{rho_a}, each chart realized
// by rotating the arc to the center of the fundamental interval.
ComplexMatrix glued_phi(const QuantizationGrid& grid, const CircleCover& cover,
                        const PhaseFunction& f, double t);

}  // namespace indexlab::quantize
