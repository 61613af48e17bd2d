#include "ptsw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "ptsw/error.hpp"

namespace ptsw {

namespace {

// Eigenvalues closer than this (relative to the matrix scale) are treated as
// one cluster when enforcing biorthogonality.
constexpr double kClusterTolerance = 1e-8;

double matrix_scale(const ComplexMatrix& m) { return std::max(1.0, m.norm()); }

std::vector<Eigen::Index> sorted_order(const ComplexVector& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return eigenvalue_less(values(a), values(b));
  });
  return order;
}

BiorthogonalEigensystem permuted(const ComplexVector& values, const ComplexMatrix& rights,
                                 const ComplexMatrix& lefts) {
  const auto order = sorted_order(values);
  const Eigen::Index n = values.size();
  BiorthogonalEigensystem out;
  out.values.resize(n);
  out.rights.resize(n, n);
  out.lefts.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = values(src);
    out.rights.col(k) = rights.col(src);
    out.lefts.row(k) = lefts.row(src);
  }
  return out;
}

// Greedy maximal-overlap assignment of transpose-problem eigenvectors to the
// right eigenvectors. Returns, for every right index, the chosen left index.
std::vector<Eigen::Index> pair_by_overlap(const ComplexMatrix& rights,
                                          const ComplexMatrix& left_rows) {
  const Eigen::Index n = rights.cols();
  struct Candidate {
    double score;
    Eigen::Index right;
    Eigen::Index left;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rn = rights.col(i).norm();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ln = left_rows.row(j).norm();
      const double score = std::abs(left_rows.row(j).dot(rights.col(i).conjugate())) / (rn * ln);
      candidates.push_back({score, i, j});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n), -1);
  std::vector<bool> left_used(static_cast<std::size_t>(n), false);
  Eigen::Index assigned = 0;
  for (const auto& c : candidates) {
    if (assigned == n) break;
    auto& slot = assignment[static_cast<std::size_t>(c.right)];
    if (slot >= 0 || left_used[static_cast<std::size_t>(c.left)]) continue;
    slot = c.left;
    left_used[static_cast<std::size_t>(c.left)] = true;
    ++assigned;
  }
  return assignment;
}

// Within each cluster of (numerically) equal eigenvalues, replace the left
// block L_c by (L_c R_c)^{-1} L_c so that the cluster is biorthonormal.
void biorthogonalize_clusters(const ComplexVector& values, const ComplexMatrix& rights,
                              ComplexMatrix& lefts, double scale) {
  const Eigen::Index n = values.size();
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (visited[static_cast<std::size_t>(i)]) continue;
    std::vector<Eigen::Index> cluster;
    for (Eigen::Index j = i; j < n; ++j) {
      if (!visited[static_cast<std::size_t>(j)] &&
          std::abs(values(j) - values(i)) <= kClusterTolerance * scale) {
        cluster.push_back(j);
        visited[static_cast<std::size_t>(j)] = true;
      }
    }
    const auto k = static_cast<Eigen::Index>(cluster.size());
    ComplexMatrix lc(k, n);
    ComplexMatrix rc(n, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      lc.row(a) = lefts.row(cluster[static_cast<std::size_t>(a)]);
      rc.col(a) = rights.col(cluster[static_cast<std::size_t>(a)]);
    }
    const ComplexMatrix gram = lc * rc;
    Eigen::FullPivLU<ComplexMatrix> lu(gram);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::DefectiveMatrix,
                  "left/right overlap block is singular near eigenvalue " +
                      std::to_string(values(i).real()) + "+" +
                      std::to_string(values(i).imag()) + "i");
    }
    const ComplexMatrix fixed = lu.solve(lc);
    for (Eigen::Index a = 0; a < k; ++a) {
      lefts.row(cluster[static_cast<std::size_t>(a)]) = fixed.row(a);
    }
  }
}

void check_conditioning(const BiorthogonalEigensystem& eig) {
  for (Eigen::Index i = 0; i < eig.dim(); ++i) {
    const double ln = eig.lefts.row(i).norm();
    const double rn = eig.rights.col(i).norm();
    const double c = std::abs(eig.lefts.row(i).dot(eig.rights.col(i).conjugate())) / (ln * rn);
    if (!std::isfinite(c) || !std::isfinite(ln) || c < kOverlapThreshold) {
      throw Error(ErrorCode::DefectiveMatrix,
                  "normalized overlap |<L|R>| below threshold for level " + std::to_string(i));
    }
  }
}

}  // namespace

bool eigenvalue_less(const Complex& a, const Complex& b) noexcept {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

bool is_finite(const ComplexMatrix& m) noexcept {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

bool is_hermitian(const ComplexMatrix& m, double rel_tol) noexcept {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= rel_tol * matrix_scale(m);
}

BiorthogonalEigensystem eigendecompose(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "eigendecompose expects a non-empty square matrix");
  }
  if (!is_finite(m)) {
    throw Error(ErrorCode::InvalidParams, "matrix has non-finite entries");
  }
  const double scale = matrix_scale(m);
  BiorthogonalEigensystem eig;

  if (is_hermitian(m, 1e-14)) {
    const ComplexMatrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::NonConvergence, "self-adjoint eigensolver did not converge");
    }
    const ComplexVector values = solver.eigenvalues().cast<Complex>();
    const ComplexMatrix& vectors = solver.eigenvectors();
    eig = permuted(values, vectors, vectors.adjoint());
  } else {
    Eigen::ComplexEigenSolver<ComplexMatrix> right_solver(m, true);
    if (right_solver.info() != Eigen::Success) {
      throw Error(ErrorCode::NonConvergence, "complex Schur iteration did not converge");
    }
    Eigen::ComplexEigenSolver<ComplexMatrix> left_solver(m.transpose(), true);
    if (left_solver.info() != Eigen::Success) {
      throw Error(ErrorCode::NonConvergence, "complex Schur iteration (transpose) did not converge");
    }
    const ComplexVector values = right_solver.eigenvalues();
    ComplexMatrix rights = right_solver.eigenvectors();
    rights.colwise().normalize();
    // Columns y of the transpose problem satisfy y^T M = mu y^T.
    const ComplexMatrix candidate_lefts = left_solver.eigenvectors().transpose();

    const auto assignment = pair_by_overlap(rights, candidate_lefts);
    ComplexMatrix lefts(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      lefts.row(i) = candidate_lefts.row(assignment[static_cast<std::size_t>(i)]);
    }
    biorthogonalize_clusters(values, rights, lefts, scale);
    eig = permuted(values, rights, lefts);
  }

  check_conditioning(eig);
  eig.residual_norm = max_residual(m, eig);
  if (!(eig.residual_norm <= tol * scale)) {
    throw Error(ErrorCode::NonConvergence,
                "eigen-residual " + std::to_string(eig.residual_norm) + " exceeds tolerance");
  }
  return eig;
}

BiorthogonalPair binormalize(const ComplexMatrix& rights, const ComplexMatrix& lefts) {
  if (rights.cols() != lefts.rows() || rights.rows() != lefts.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "rights are n x k, lefts must be k x n");
  }
  BiorthogonalPair out{rights, lefts};
  for (Eigen::Index i = 0; i < rights.cols(); ++i) {
    const double rn = out.rights.col(i).norm();
    if (!(rn > 0.0)) {
      throw Error(ErrorCode::DefectiveMatrix, "zero right vector " + std::to_string(i));
    }
    out.rights.col(i) /= rn;
    const Complex overlap = out.lefts.row(i) * out.rights.col(i);
    const double ln = out.lefts.row(i).norm();
    if (!(std::abs(overlap) >= kOverlapThreshold * ln) || ln == 0.0) {
      throw Error(ErrorCode::DefectiveMatrix,
                  "diagonal overlap <L_i|R_i> vanishes for index " + std::to_string(i));
    }
    out.lefts.row(i) /= overlap;
  }
  return out;
}

std::vector<std::vector<std::size_t>> cluster_quasi_degenerate(const ComplexVector& values,
                                                               double gap) {
  if (!(gap > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "cluster gap must be positive");
  }
  std::vector<std::vector<std::size_t>> groups;
  const auto order = sorted_order(values);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto idx = static_cast<std::size_t>(order[k]);
    if (k == 0 || values(order[k]).real() - values(order[k - 1]).real() >= gap) {
      groups.emplace_back();
    }
    groups.back().push_back(idx);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

double biorthogonality_error(const BiorthogonalEigensystem& eig) {
  const ComplexMatrix overlap = eig.lefts * eig.rights;
  return (overlap - ComplexMatrix::Identity(eig.dim(), eig.dim())).cwiseAbs().maxCoeff();
}

double completeness_error(const BiorthogonalEigensystem& eig) {
  const ComplexMatrix resolution = eig.rights * eig.lefts;
  return (resolution - ComplexMatrix::Identity(eig.dim(), eig.dim())).norm();
}

double max_residual(const ComplexMatrix& m, const BiorthogonalEigensystem& eig) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < eig.dim(); ++i) {
    const ComplexVector r = eig.rights.col(i);
    worst = std::max(worst, (m * r - eig.values(i) * r).norm() / r.norm());
  }
  return worst;
}

double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (std::size_t i = 0; i < n && worst < best; ++i) {
        worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
      }
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used(n, false);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(a[i] - b[j]);
      if (d < best) {
        best = d;
        pick = j;
      }
    }
    used[pick] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<Complex> to_std(const ComplexVector& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace ptsw
