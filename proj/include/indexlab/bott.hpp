#pragma once

#include <functional>
#include <optional>

#include "indexlab/clifford.hpp"
#include "indexlab/fredholm.hpp"
#include "indexlab/quantize.hpp"

namespace indexlab::bott {

struct OscillatorConfig {
  int n = 1;          // spatial dimension, 1 or 2
  double t = 1.0;     // scale parameter > 0
  std::size_t N = 0;  // grid points per axis, power of two, >= 16
  double L = 0.0;     // half-width; needs L >= 6/sqrt(t)
  double potential_sign = 1.0;  // -1 flips c(x), moving the kernel to odd forms

  void validate() const;
};

// B_t = sum_j t^{-1} (d_j - d_j^*) (x) del_j + sign * sum_j x_j (d_j + d_j^*)
// on the periodized grid, grid-major / fiber-minor layout.
struct OscillatorOperator {
  OscillatorConfig config;
  clifford::CliffordRep cliff;
  quantize::QuantizationGrid grid;
  ComplexMatrix matrix;
  std::vector<double> eps_signs;  // I_grid (x) epsilon

  double theoretical_gap() const;  // sqrt(2/t)

  const fredholm::NearZeroAnalysis& analysis(const Tolerances& tol) const;
  const fredholm::Reduction& reduced(const Tolerances& tol) const;

 private:
  mutable std::optional<fredholm::NearZeroAnalysis> analysis_;
  mutable std::optional<fredholm::Reduction> reduced_;
};

OscillatorOperator build_bott(const OscillatorConfig& config,
                              const Tolerances& tol = {});

// The `count` smallest-magnitude eigenvalues of the artifact-filtered
// spectrum, ordered by |lambda|.
std::vector<double> bott_spectrum(const OscillatorOperator& op,
                                  std::size_t count,
                                  const Tolerances& tol = {});

// dim ker(B+) - dim ker(B-) from the filtered near-zero modes. gap_tol is
// the absolute kernel window; the band [gap_tol, 10 gap_tol) must be free
// of eigenvalues.
long long bott_index(const OscillatorOperator& op, double gap_tol,
                     const Tolerances& tol = {});

// Kernel diagnostics for the filtered zero mode (n = 1).
struct KernelReport {
  double zero_form_weight = 0.0;   // mass in the 0-form fiber component
  double gaussian_gamma = 0.0;     // fitted width of exp(-gamma x^2)
  double gaussian_fit_r2 = 0.0;
  double eigenvalue = 0.0;
  std::size_t near_zero_count = 0;  // filtered count in the kernel window
};
KernelReport bott_kernel_report(const OscillatorOperator& op,
                                const Tolerances& tol = {});

// f(eps x + c(v, xi)) via fiber functional calculus; the point-base Thom
// map evaluated on sample sets.
struct ThomPointTable {
  std::vector<double> radii;     // |(v, xi)| per sample ring
  std::vector<double> sup_norm;  // sup over samples at that radius
  double decay_sup = 0.0;        // value at the outermost ring
};
ThomPointTable thom_point_map(const clifford::CliffordRep& rep,
                              const std::function<cplx(double)>& f,
                              const std::vector<double>& x_samples,
                              const std::vector<double>& radii,
                              const Tolerances& tol = {});
ComplexMatrix thom_point_value(const clifford::CliffordRep& rep,
                               const std::function<cplx(double)>& f, double x,
                               const std::vector<double>& v,
                               const std::vector<double>& xi);

// sup over x_samples of ||f(eps x + s^{-1} B_t) - f(x) P_t|| per s, on the
// artifact-filtered operator; P_t is the kernel projection.
quantize::DecayTable homotopy_b20(const OscillatorOperator& op,
                                  const std::function<cplx(double)>& f,
                                  double support_radius,
                                  const std::vector<double>& x_samples,
                                  const std::vector<double>& s_list,
                                  const Tolerances& tol = {});

// L^2 norm of v -> (2t/pi)^{n/4} exp(-t |v|^2) by Riemann-sum quadrature on
// [-L, L]^n; equals 1 in exact arithmetic.
double alpha_isometry(double t, int n, std::size_t quad_points, double quad_L);

}  // namespace indexlab::bott
