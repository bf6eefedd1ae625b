#pragma once

#include <functional>
#include <vector>

#include "indexlab/linalg.hpp"
#include "indexlab/matrix.hpp"

namespace indexlab::fredholm {

// A graded Hermitian operator on a periodic grid carries, besides the
// physically meaningful near-zero modes, discretization artifacts pinned to
// the grid's defect structures (the periodization seam of a line grid, the
// Brillouin-zone corners of a difference stencil). For a square matrix the
// two families are forced to pair up (eigenvalues of [[0,D*],[D,0]] come in
// +-sigma pairs), so a raw chirality count of the near-zero spectrum is
// identically zero. The analysis below separates the families inside the
// near-zero span, sector by sector, by diagonalizing a quadratic "defect
// localization" form whose eigenvalues are ~0 on resolved states and ~1 on
// seam/corner states.

// Quadratic form measuring how much of a (single-sector, grid x fiber)
// vector lives in the grid's defect region. Returns Q v.
using DefectForm = std::function<std::vector<cplx>(const std::vector<cplx>&)>;

struct SectorModes {
  long long physical = 0;
  long long artifact = 0;
  // orthonormal full-space vectors spanning each family (sector-pure)
  ComplexMatrix physical_vectors;
  ComplexMatrix artifact_vectors;
  std::vector<double> defect_scores;  // eigenvalues of the defect form
};

struct NearZeroAnalysis {
  std::vector<double> window_values;  // eigenvalues inside the window
  std::vector<double> all_values;     // full spectrum
  SectorModes plus;
  SectorModes minus;
  double gap_used = 0.0;
  double window = 0.0;

  long long index() const { return plus.physical - minus.physical; }
  long long artifact_count() const { return plus.artifact + minus.artifact; }
};

// op: Hermitian, eps_signs: +-1 grading per basis index (op must
// anticommute with it), gap: first nonzero |eigenvalue| of the resolved
// spectrum, window = window_frac * gap. The defect form acts on sector
// component vectors indexed like the full space (entries of the opposite
// sector zeroed).
NearZeroAnalysis analyze_near_zero(const ComplexMatrix& op,
                                   const std::vector<double>& eps_signs,
                                   const DefectForm& defect, double gap,
                                   double window_frac, double artifact_lo,
                                   double artifact_hi);

// The operator compressed to the complement of the artifact directions:
// iso is the embedding (full_dim x reduced_dim), eps stays diagonal +-1
// because artifact directions are sector-pure.
struct Reduction {
  ComplexMatrix op;
  std::vector<double> eps_signs;
  ComplexMatrix iso;
};

Reduction compress_artifacts(const ComplexMatrix& op,
                             const std::vector<double>& eps_signs,
                             const NearZeroAnalysis& analysis);

// Spectrum with the artifact pairs removed: the in-window eigenvalues are
// replaced by one Rayleigh quotient per physical direction. Equal to the
// spectrum of the compressed operator up to O(sigma^2 / gap).
std::vector<double> physical_spectrum(const ComplexMatrix& op,
                                      const NearZeroAnalysis& analysis);

// Defect forms for the two grid families.
// Periodized line/plane: mass near the periodization seam (|x|_inf beyond
// boundary_frac * L) plus mass in the top frequency quarter.
DefectForm line_defect_form(int n, std::size_t N, double L,
                            std::size_t fiber, double boundary_frac = 0.75);
// Closed grids (circle/torus): mass in the outer half of the Brillouin
// zone (|k|_inf > N/4), where difference-stencil doublers live.
DefectForm fourier_defect_form(int n, std::size_t N, std::size_t fiber);

}  // namespace indexlab::fredholm
