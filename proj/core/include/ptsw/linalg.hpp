#pragma once

// Dense complex linear algebra for small non-Hermitian operators.
//
// The central object is a biorthonormal eigensystem. Right eigenvectors are
// columns, left eigenvectors are rows, with lefts * rights == identity. Everything here targets dimensions of a few
// dozen; no attempt is made at sparse or iterative methods.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ptsw {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using ComplexRowVector = Eigen::RowVectorXcd;

inline constexpr double kResidualTolerance = 1e-10;
inline constexpr double kOverlapThreshold = 1e-12;

struct BiorthogonalEigensystem {
  ComplexVector values;   ///< E_i, sorted by (Re, Im)
  ComplexMatrix rights;   ///< column i is |R_i>, unit Euclidean norm
  ComplexMatrix lefts;    ///< row i is <L_i|, scaled so <L_i|R_j> = delta_ij
  double residual_norm = 0.0;

  Eigen::Index dim() const { return values.size(); }
};

struct BiorthogonalPair {
  ComplexMatrix rights;
  ComplexMatrix lefts;
};

/// Strict weak ordering used for every eigenvalue list in the library:
/// ascending real part, ties broken by ascending imaginary part.
bool eigenvalue_less(const Complex& a, const Complex& b) noexcept;

/// Eigendecomposition of a general square complex matrix.
///
/// Hermitian input goes through the self-adjoint solver (orthonormal basis,
/// real eigenvalues). Everything else uses complex Schur (Hessenberg + shifted
/// QR); left eigenvectors come from the transpose problem and are paired to
/// the right ones by maximal overlap, then binormalized. Exactly degenerate
/// clusters are biorthogonalized inside the cluster.
///
/// Throws DimensionMismatch for non-square input, InvalidParams for
/// non-finite entries, NonConvergence when QR fails or the residual exceeds
/// `tol` (relative to max(1, ||M||)), and DefectiveMatrix when some
/// normalized overlap |<L_i|R_i>| falls below kOverlapThreshold.
BiorthogonalEigensystem eigendecompose(const ComplexMatrix& m,
                                       double tol = kResidualTolerance);

/// Rescales paired vectors so that <L_i|R_j> = delta_ij with unit-norm rights.
/// Off-diagonal overlaps are not touched; callers pass already paired sets.
BiorthogonalPair binormalize(const ComplexMatrix& rights, const ComplexMatrix& lefts);

/// Partition of eigenvalue indices into quasi-degenerate groups. Indices are
/// sorted by `eigenvalue_less`; a new group starts wherever consecutive real
/// parts differ by at least `gap`. Groups and their members come out in
/// ascending order.
std::vector<std::vector<std::size_t>> cluster_quasi_degenerate(const ComplexVector& values,
                                                               double gap);

// Diagnostics shared by tests and the acceptance suite.
double biorthogonality_error(const BiorthogonalEigensystem& eig);
double completeness_error(const BiorthogonalEigensystem& eig);
double max_residual(const ComplexMatrix& m, const BiorthogonalEigensystem& eig);

/// Distance between two eigenvalue multisets: the largest distance of the
/// optimal one-to-one matching, found by exhaustive permutation for n <= 8
/// and greedy nearest matching above that.
double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b);

bool is_finite(const ComplexMatrix& m) noexcept;
bool is_hermitian(const ComplexMatrix& m, double rel_tol) noexcept;

std::vector<Complex> to_std(const ComplexVector& v);

}  // namespace ptsw
