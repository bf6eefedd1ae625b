#include "indexlab/cstar.hpp"

#include <algorithm>
#include <cmath>

namespace indexlab::cstar {

Algebra::Algebra(std::vector<int> b) : blocks(std::move(b)) {
  require(!blocks.empty(), ErrorCode::invalid_argument,
          "algebra needs at least one block");
  for (int k : blocks)
    require(k >= 1, ErrorCode::invalid_argument, "block sizes must be >= 1");
}

AMatrix AMatrix::zero(const Algebra& a, std::size_t m) {
  AMatrix x;
  x.algebra = a;
  x.amplification = m;
  for (int k : a.blocks)
    x.block.emplace_back(m * static_cast<std::size_t>(k),
                         m * static_cast<std::size_t>(k));
  return x;
}

AMatrix AMatrix::identity(const Algebra& a, std::size_t m) {
  AMatrix x = zero(a, m);
  for (auto& b : x.block) b = ComplexMatrix::identity(b.rows());
  return x;
}

double AMatrix::projection_defect() const {
  double worst = 0.0;
  for (const auto& b : block) {
    ComplexMatrix sq = matmul(b, b);
    sq -= b;
    worst = std::max(worst, sq.frobenius());
    worst = std::max(worst, (b - b.adjoint()).frobenius() * 0.5);
  }
  return worst;
}

bool AMatrix::same_shape(const AMatrix& o) const {
  if (!(algebra == o.algebra) || amplification != o.amplification ||
      block.size() != o.block.size())
    return false;
  for (std::size_t i = 0; i < block.size(); ++i)
    if (block[i].rows() != o.block[i].rows()) return false;
  return true;
}

K0Class::K0Class(Algebra a, std::vector<long long> r)
    : algebra(std::move(a)), ranks(std::move(r)) {
  require(ranks.size() == algebra.block_count(), ErrorCode::invalid_argument,
          "K0 rank vector length must match the block count");
}

K0Class K0Class::operator+(const K0Class& o) const {
  require(algebra == o.algebra, ErrorCode::invalid_argument,
          "K0 classes over different algebras");
  K0Class r = *this;
  for (std::size_t i = 0; i < ranks.size(); ++i) r.ranks[i] += o.ranks[i];
  return r;
}

K0Class K0Class::operator-(const K0Class& o) const {
  require(algebra == o.algebra, ErrorCode::invalid_argument,
          "K0 classes over different algebras");
  K0Class r = *this;
  for (std::size_t i = 0; i < ranks.size(); ++i) r.ranks[i] -= o.ranks[i];
  return r;
}

long long rank_from_projection_spectrum(const std::vector<double>& eigenvalues,
                                        int k, double rank_tol) {
  long long count = 0;
  for (double v : eigenvalues) {
    require(v < rank_tol || v > 1.0 - rank_tol, ErrorCode::numerical_failure,
            "ambiguous projection: eigenvalue " + std::to_string(v) +
                " inside the forbidden band");
    if (v > 0.5) ++count;
  }
  require(count % k == 0, ErrorCode::numerical_failure,
          "projection rank " + std::to_string(count) +
              " is not a multiple of the block size " + std::to_string(k));
  return count / k;
}

K0Class k0_of_projection(const AMatrix& p, double rank_tol) {
  require(rank_tol > 0.0 && rank_tol < 0.5, ErrorCode::invalid_argument,
          "rank_tol must lie in (0, 1/2)");
  std::vector<long long> ranks;
  for (std::size_t i = 0; i < p.block.size(); ++i) {
    auto vals = linalg::hermitian_eigenvalues(p.block[i]);
    ranks.push_back(
        rank_from_projection_spectrum(vals, p.algebra.blocks[i], rank_tol));
  }
  return K0Class(p.algebra, std::move(ranks));
}

K0Class difference_class(const AMatrix& p, const AMatrix& q, double rank_tol) {
  require(p.same_shape(q), ErrorCode::invalid_argument,
          "difference_class: mismatched algebra or amplification");
  return k0_of_projection(p, rank_tol) - k0_of_projection(q, rank_tol);
}

AMatrix amplify(const AMatrix& x, std::size_t m_extra) {
  require(m_extra >= 1, ErrorCode::invalid_argument,
          "amplification factor must be >= 1");
  AMatrix out;
  out.algebra = x.algebra;
  out.amplification = x.amplification * m_extra;
  ComplexMatrix eye = ComplexMatrix::identity(m_extra);
  for (const auto& b : x.block) out.block.push_back(kron(eye, b));
  return out;
}

}  // namespace indexlab::cstar
