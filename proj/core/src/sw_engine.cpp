#include "ptsw/sw_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptsw/error.hpp"

namespace ptsw {

namespace {

constexpr double kDenominatorTolerance = 1e-10;

double spectral_spread(const ComplexVector& values) {
  double spread = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    for (Eigen::Index j = i + 1; j < values.size(); ++j) {
      spread = std::max(spread, std::abs(values(i) - values(j)));
    }
  }
  return spread > 0.0 ? spread : 1.0;
}

void check_operator(const BiorthogonalEigensystem& eig, const ComplexMatrix& v) {
  if (v.rows() != eig.dim() || v.cols() != eig.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "perturbation dimension does not match H0");
  }
}

void check_group(const BiorthogonalEigensystem& eig, const QuasiDegenerateGroup& group) {
  if (group.dim() != static_cast<std::size_t>(eig.dim())) {
    throw Error(ErrorCode::IndexOutOfRange, "group was built for a different dimension");
  }
}

Complex inverse_gap(const ComplexVector& e, std::size_t q, std::size_t p, double threshold) {
  const Complex gap = e(static_cast<Eigen::Index>(q)) - e(static_cast<Eigen::Index>(p));
  if (std::abs(gap) < threshold) {
    throw Error(ErrorCode::VanishingDenominator,
                "E_q - E_p vanishes for q=" + std::to_string(q) + ", p=" + std::to_string(p));
  }
  return 1.0 / gap;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

}  // namespace

QuasiDegenerateGroup QuasiDegenerateGroup::from_p(std::vector<std::size_t> p_indices,
                                                  std::size_t dim) {
  if (p_indices.empty()) {
    throw Error(ErrorCode::InvalidParams, "quasi-degenerate group P must be non-empty");
  }
  std::vector<bool> in_p(dim, false);
  for (const auto idx : p_indices) {
    if (idx >= dim) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "index " + std::to_string(idx) + " outside dimension " + std::to_string(dim));
    }
    if (in_p[idx]) {
      throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(idx) + " repeated in P");
    }
    in_p[idx] = true;
  }
  std::vector<std::size_t> q;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!in_p[i]) q.push_back(i);
  }
  return QuasiDegenerateGroup(std::move(p_indices), std::move(q));
}

ComplexMatrix to_eigenbasis(const BiorthogonalEigensystem& eig, const ComplexMatrix& a) {
  return eig.lefts * a * eig.rights;
}

ComplexMatrix from_eigenbasis(const BiorthogonalEigensystem& eig, const ComplexMatrix& a) {
  return eig.rights * a * eig.lefts;
}

Projectors build_projectors(const BiorthogonalEigensystem& eig, const QuasiDegenerateGroup& group) {
  check_group(eig, group);
  const Eigen::Index n = eig.dim();
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (const auto idx : group.p_indices()) {
    const auto i = static_cast<Eigen::Index>(idx);
    p.noalias() += eig.rights.col(i) * eig.lefts.row(i);
  }
  ComplexMatrix q = ComplexMatrix::Identity(n, n) - p;
  return {std::move(p), std::move(q)};
}

SplitPerturbation split_perturbation(const ComplexMatrix& v, const Projectors& proj) {
  if (v.rows() != proj.p.rows() || v.cols() != proj.p.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "perturbation and projectors differ in dimension");
  }
  SplitPerturbation out;
  out.diagonal = proj.p * v * proj.p + proj.q * v * proj.q;
  out.off_diagonal = proj.p * v * proj.q + proj.q * v * proj.p;
  return out;
}

ComplexMatrix build_generator(const BiorthogonalEigensystem& eig, const ComplexMatrix& v,
                              const QuasiDegenerateGroup& group) {
  check_group(eig, group);
  check_operator(eig, v);
  const double threshold = kDenominatorTolerance * spectral_spread(eig.values);
  const ComplexMatrix vt = to_eigenbasis(eig, v);
  ComplexMatrix st = ComplexMatrix::Zero(eig.dim(), eig.dim());
  for (const auto p : group.p_indices()) {
    for (const auto q : group.q_indices()) {
      const Complex inv = inverse_gap(eig.values, q, p, threshold);
      const auto pi = static_cast<Eigen::Index>(p);
      const auto qi = static_cast<Eigen::Index>(q);
      st(pi, qi) = -vt(pi, qi) * inv;  // P U1 Q
      st(qi, pi) = vt(qi, pi) * inv;   // Q U2 P
    }
  }
  return from_eigenbasis(eig, st);
}

SWDecomposition decompose(const BiorthogonalEigensystem& eig, const ComplexMatrix& v,
                          const QuasiDegenerateGroup& group) {
  auto proj = build_projectors(eig, group);
  auto split = split_perturbation(v, proj);
  auto s0 = build_generator(eig, v, group);
  return {std::move(proj.p), std::move(proj.q), std::move(split.diagonal),
          std::move(split.off_diagonal), std::move(s0)};
}

EffectiveHamiltonian effective_hamiltonian(const BiorthogonalEigensystem& eig,
                                           const ComplexMatrix& v, double g,
                                           const QuasiDegenerateGroup& group,
                                           std::vector<std::string> labels) {
  check_group(eig, group);
  check_operator(eig, v);
  const auto& ps = group.p_indices();
  const auto& qs = group.q_indices();
  if (!labels.empty() && labels.size() != ps.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one basis label per group state expected");
  }
  const double threshold = kDenominatorTolerance * spectral_spread(eig.values);
  const ComplexMatrix vt = to_eigenbasis(eig, v);

  // inv(q, p) = 1 / (E_q - E_p), validated once.
  ComplexMatrix inv(static_cast<Eigen::Index>(qs.size()), static_cast<Eigen::Index>(ps.size()));
  for (std::size_t a = 0; a < qs.size(); ++a) {
    for (std::size_t b = 0; b < ps.size(); ++b) {
      inv(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          inverse_gap(eig.values, qs[a], ps[b], threshold);
    }
  }

  const auto np = static_cast<Eigen::Index>(ps.size());
  ComplexMatrix h(np, np);
  for (Eigen::Index a = 0; a < np; ++a) {
    const auto p = static_cast<Eigen::Index>(ps[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < np; ++b) {
      const auto pp = static_cast<Eigen::Index>(ps[static_cast<std::size_t>(b)]);
      Complex second{0.0, 0.0};
      for (std::size_t c = 0; c < qs.size(); ++c) {
        const auto q = static_cast<Eigen::Index>(qs[c]);
        const auto ci = static_cast<Eigen::Index>(c);
        second += (inv(ci, a) + inv(ci, b)) * vt(p, q) * vt(q, pp);
      }
      h(a, b) = (a == b ? eig.values(p) : Complex{0.0, 0.0}) + g * vt(p, pp) - 0.5 * g * g * second;
    }
  }
  if (labels.empty()) {
    for (const auto p : ps) labels.push_back(std::to_string(p));
  }
  return {std::move(h), std::move(labels), g, 2};
}

double transform_check(const ComplexMatrix& h0, const ComplexMatrix& v, const ComplexMatrix& s0,
                       double g, const Projectors& proj, int order) {
  if (order < 1) {
    throw Error(ErrorCode::InvalidParams, "transform_check needs order >= 1");
  }
  if (h0.rows() != v.rows() || s0.rows() != v.rows() || proj.p.rows() != v.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "transform_check operands differ in dimension");
  }
  // ad^k(H0) contributes at g^k, ad^k(V) at g^(k+1).
  ComplexMatrix transformed = h0;
  ComplexMatrix ad_h0 = h0;
  ComplexMatrix ad_v = v;
  double factorial = 1.0;
  transformed += g * v;
  for (int k = 1; k <= order; ++k) {
    factorial *= k;
    ad_h0 = commutator(s0, ad_h0);
    transformed += std::pow(g, k) / factorial * ad_h0;
    if (k + 1 <= order) {
      ad_v = commutator(s0, ad_v);
      transformed += std::pow(g, k + 1) / factorial * ad_v;
    }
  }
  return (proj.p * transformed * proj.q).norm() + (proj.q * transformed * proj.p).norm();
}

}  // namespace ptsw
