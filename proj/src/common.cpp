#include "indexlab/common.hpp"

#include <utility>

namespace indexlab {

namespace {

struct TolEntry {
  const char* key;
  double Tolerances::*member;
};

const TolEntry kEntries[] = {
    {"hermitian_flag", &Tolerances::hermitian_flag},
    {"eig_reconstruct", &Tolerances::eig_reconstruct},
    {"unitary", &Tolerances::unitary},
    {"func_calc_hermitian", &Tolerances::func_calc_hermitian},
    {"dft_roundtrip", &Tolerances::dft_roundtrip},
    {"opnorm_rel", &Tolerances::opnorm_rel},
    {"projection_flag", &Tolerances::projection_flag},
    {"rank_tol", &Tolerances::rank_tol},
    {"clifford_exact", &Tolerances::clifford_exact},
    {"bott_eig_abs", &Tolerances::bott_eig_abs},
    {"chirality", &Tolerances::chirality},
    {"b20_norm", &Tolerances::b20_norm},
    {"alpha_norm", &Tolerances::alpha_norm},
    {"module_exact", &Tolerances::module_exact},
    {"boundary_eta", &Tolerances::boundary_eta},
    {"decay_threshold", &Tolerances::decay_threshold},
    {"freeze_threshold", &Tolerances::freeze_threshold},
    {"slope_lo", &Tolerances::slope_lo},
    {"slope_hi", &Tolerances::slope_hi},
    {"artifact_lo", &Tolerances::artifact_lo},
    {"artifact_hi", &Tolerances::artifact_hi},
    {"gap_fraction", &Tolerances::gap_fraction},
    {"symm_slack", &Tolerances::symm_slack},
};

}  // namespace

bool Tolerances::set(const std::string& key, double value) {
  for (const auto& entry : kEntries) {
    if (key == entry.key) {
      this->*(entry.member) = value;
      return true;
    }
  }
  return false;
}

double Tolerances::get(const std::string& key) const {
  for (const auto& entry : kEntries) {
    if (key == entry.key) return this->*(entry.member);
  }
  fail(ErrorCode::config, "unknown tolerance key: " + key);
}

const std::vector<std::string>& Tolerances::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& entry : kEntries) out.emplace_back(entry.key);
    return out;
  }();
  return k;
}

}  // namespace indexlab
