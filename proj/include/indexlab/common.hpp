#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace indexlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy mirrored by the C API status codes.
enum class ErrorCode {
  invalid_argument = 1,
  numerical_failure = 2,
  precondition = 3,
  config = 4,
  io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

// Central tolerance table. Every numerical gate in the library reads from
// here so that experiment configs can override any of them by name.
struct Tolerances {
  double hermitian_flag = 1e-12;      // ||M - M*|| <= tol * ||M||
  double eig_reconstruct = 1e-10;     // ||V L V* - M|| <= tol * (1 + ||M||)
  double unitary = 1e-10;             // ||V*V - I||
  double func_calc_hermitian = 1e-12;
  double dft_roundtrip = 1e-12;
  double opnorm_rel = 1e-8;
  double projection_flag = 1e-8;      // ||p^2 - p||, ||p - p*|| per block
  double rank_tol = 1e-6;             // forbidden band for projection ranks
  double clifford_exact = 1e-12;
  double bott_eig_abs = 1e-6;         // |lambda_k - sqrt(2k/t)|
  double chirality = 1e-3;            // |<psi, eps psi>| within tol of +-1
  double b20_norm = 1e-8;
  double alpha_norm = 1e-8;
  double module_exact = 1e-12;        // Phi_t(rho F) = M_rho Phi_t(F)
  double boundary_eta = 1e-4;         // C0 boundary-shell sup for symbols
  double decay_threshold = 0.05;      // generic "small at t_max" gate
  double freeze_threshold = 0.1;
  double slope_lo = -1.15;
  double slope_hi = -0.85;
  double artifact_lo = 0.25;          // kernel-filter score: physical below
  double artifact_hi = 0.75;          // kernel-filter score: artifact above
  double gap_fraction = 0.5;          // near-zero window = fraction * gap
  double symm_slack = 1e-3;           // commutator bound slack factor

  // Named lookup used by config/CLI overrides. Returns false for unknown keys.
  bool set(const std::string& key, double value);
  double get(const std::string& key) const;
  static const std::vector<std::string>& keys();
};

// Deterministic RNG for property trials: fixed algorithm and fixed
// transforms so that sequences are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() {  // [0,1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, explicit form for reproducibility.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do { u1 = uniform(); } while (u1 <= 1e-300);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  cplx normal_cplx() {
    double re = normal();
    double im = normal();
    return cplx(re, im) / std::sqrt(2.0);
  }

  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace indexlab
