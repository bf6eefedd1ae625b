#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "indexlab/bott.hpp"
#include "indexlab/cstar.hpp"
#include "indexlab/fredholm.hpp"
#include "indexlab/quantize.hpp"

namespace indexlab::elliptic {

// First-order differential operator D = sum_j a_j(x) d_j + b(x) acting on
// A^k-valued grid functions, coefficients sampled per block: for block i the
// samples are (k * k_i)-dimensional fiber matrices, one per grid point.
struct FirstOrderOp {
  quantize::QuantizationGrid grid;
  cstar::Algebra algebra;
  int k = 1;
  // a[axis][block][point], b[block][point]
  std::vector<std::vector<std::vector<ComplexMatrix>>> a;
  std::vector<std::vector<ComplexMatrix>> b;
  double ellipticity_c0 = 0.0;  // filled by make_first_order_op

  std::size_t fiber_dim(std::size_t block) const {
    return static_cast<std::size_t>(k) * algebra.blocks[block];
  }
  // principal symbol sigma(x, xi) = i sum_j a_j(x) xi_j, per block
  ComplexMatrix symbol(std::size_t block, std::size_t point,
                       const std::vector<double>& xi) const;
  // Prop(D, x) = sup over unit xi of ||sigma(x, xi)||
  double prop_at(std::size_t block, std::size_t point) const;
};

// Validates anti-Hermitian a_j, the formal self-adjointness identity
// b - b* = sum_j d_j a_j (spectral derivative, tolerance 1e-8), and
// ellipticity (reports the worst point and singular value on failure).
FirstOrderOp make_first_order_op(
    const quantize::QuantizationGrid& grid, const cstar::Algebra& algebra,
    int k, std::vector<std::vector<std::vector<ComplexMatrix>>> a_samples,
    std::vector<std::vector<ComplexMatrix>> b_samples,
    const Tolerances& tol = {});

// Symmetrized discretization sum_j (M_a del_j + del_j M_a)/2 + M_{b_sym},
// one Hermitian dense matrix per block.
std::vector<ComplexMatrix> discretize(const FirstOrderOp& op,
                                      const Tolerances& tol = {});

// Derived symbol data used by the resolvent-decay and ellipticity reports.
struct SymbolReport {
  std::vector<double> shell_radius;
  std::vector<double> resolvent_sup;   // sup_x ||(sigma +- i)^{-1}|| per shell
  double c0 = 0.0;                     // ellipticity constant
  double bound_constant = 0.0;         // fitted C in C/(1 + c0 |xi|)
  bool homogeneity_ok = true;          // doubling xi halves the sup (x1.1)
  bool pass = true;
};
SymbolReport symbol_resolvent_decay(const FirstOrderOp& op,
                                    const std::vector<double>& shells);

struct CommutatorBound {
  double lhs = 0.0;  // ||[D, M_phi]||
  double rhs = 0.0;  // sup_x ||d phi(x)|| Prop(D, x)
  bool ok = false;
};
CommutatorBound commutator_bound_check(const FirstOrderOp& op,
                                       const std::vector<double>& phi,
                                       const Tolerances& tol = {});

struct Lemma45Result {
  quantize::DecayTable part1;  // ||[M_phi, f(D_1/t)]||
  quantize::DecayTable part2;  // ||M_phi f(D_1/t) - M_phi f(D_2/t)||
  quantize::DecayTable part3;  // ||M_phi f(D_1/t) - f(D_2/t) M_phi||
  bool resolvent_bound_ok = true;  // part1 with f = r_+ against t^{-1}||[D_1,M_phi]||
};
Lemma45Result lemma45_decay(const FirstOrderOp& op1, const FirstOrderOp& op2,
                            const std::vector<double>& phi,
                            const std::function<cplx(double)>& f,
                            const std::vector<double>& t_list,
                            const Tolerances& tol = {});

struct FreezeRow {
  double halfwidth = 0.0;
  double delta = 0.0;  // coefficient deviation over the bump support
  double norm = 0.0;   // ||M_phi (f(D/t) - f(D^x0/t))||
};
std::vector<FreezeRow> freeze_compare(const FirstOrderOp& op,
                                      std::size_t x0_point,
                                      const std::vector<double>& halfwidths,
                                      const std::function<cplx(double)>& f,
                                      double t, const Tolerances& tol = {});

// ||Phi_t(phi f(sigma)) - M_phi f(t^{-1} D)||, max over blocks, per t.
quantize::DecayTable quantization_convergence(
    const FirstOrderOp& op, const std::vector<double>& phi,
    const std::function<cplx(double)>& f, const std::vector<double>& t_list,
    const Tolerances& tol = {});

// The doubled odd operator over E+ (+) E-, one Hermitian block per algebra
// block, grading +1 on the first spinor slot.
struct DoubledBlock {
  ComplexMatrix op;
  std::vector<double> eps_signs;
  double gap = 1.0;
  fredholm::DefectForm defect;
  mutable std::optional<fredholm::NearZeroAnalysis> analysis_cache;
  mutable std::optional<fredholm::Reduction> reduction_cache;

  const fredholm::NearZeroAnalysis& analysis(const Tolerances& tol) const;
  const fredholm::Reduction& reduced(const Tolerances& tol) const;
};

struct DoubledOp {
  cstar::Algebra algebra;
  quantize::QuantizationGrid grid;
  std::vector<int> flux;  // set for torus flux operators
  std::vector<std::shared_ptr<DoubledBlock>> blocks;
};

// [[0, D],[D, 0]] for a formally self-adjoint D (so D^t = D).
DoubledOp double_first_order(const FirstOrderOp& op, const Tolerances& tol = {});

// The oscillator embedded as a doubled operator over A = C.
DoubledOp from_bott(const bott::OscillatorOperator& op);

// Flat torus Dirac twisted by a degree-d line bundle per block, realized by
// order-8 central-difference stencils over magnetic one-site translations
// (uniform flux per plaquette; the boundary links carry the transition
// phases). Fiber layout per grid point: spinor sector major, block fiber
// minor (slots 0..k_i-1 positive chirality, k_i..2k_i-1 negative).
DoubledOp twisted_dirac_torus(const std::vector<int>& flux, std::size_t N,
                              const cstar::Algebra& algebra,
                              const Tolerances& tol = {});

// Principal symbol of the block operator as a fiber-matrix callable
// (xi -> 2k_i x 2k_i), for quantization comparisons.
std::function<ComplexMatrix(const std::vector<double>&)> dirac_symbol(
    const DoubledOp& dop, std::size_t block);

// Cayley transform U_t = (t^{-1} D + i)(t^{-1} D - i)^{-1} of the reduced
// block operator.
ComplexMatrix cayley(const DoubledOp& dop, std::size_t block, double t,
                     const Tolerances& tol = {});

// [ker D] - [ker D^t] per block from the filtered near-zero modes,
// module ranks (counts divided by k_i).
cstar::K0Class analytic_index(const DoubledOp& dop, double gap_tol_frac,
                              const Tolerances& tol = {});

// [p(eps)] - [p(eps U_t)] at a small Cayley scale, via the exact pair
// reduction of the reduced operator's spectrum; equals analytic_index.
cstar::K0Class morphism_index(const DoubledOp& dop, double t_small,
                              double rank_tol, const Tolerances& tol = {});

// Same class computed from dense p(eps), p(eps U_t) projections and
// eigenvalue counting; the small-scale cross-check for morphism_index.
cstar::K0Class morphism_index_dense(const DoubledOp& dop, double t_small,
                                    double rank_tol, const Tolerances& tol = {});

// The Gysin image for the flux-twisted symbol class in closed form.
cstar::K0Class topological_index_torus(const std::vector<int>& flux,
                                       const cstar::Algebra& algebra);

}  // namespace indexlab::elliptic
