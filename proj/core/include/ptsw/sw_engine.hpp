#pragma once

// Schrieffer-Wolff reduction of H = H0 + g V onto a quasi-degenerate group of
// H0 eigenstates, for non-Hermitian H0 and V.
//
// All index sums run in the biorthonormal eigenbasis of H0: an operator A is
// represented by the matrix elements <L_i|A|R_j>. The group P is a set of
// indices into that eigensystem and Q is its complement.

#include <cstddef>
#include <string>
#include <vector>

#include "ptsw/linalg.hpp"

namespace ptsw {

class QuasiDegenerateGroup {
 public:
  /// Builds P from `p_indices` and Q as the complement in [0, dim).
  /// Throws IndexOutOfRange for indices >= dim or repeated indices, and
  /// InvalidParams when P is empty.
  static QuasiDegenerateGroup from_p(std::vector<std::size_t> p_indices, std::size_t dim);

  const std::vector<std::size_t>& p_indices() const noexcept { return p_; }
  const std::vector<std::size_t>& q_indices() const noexcept { return q_; }
  std::size_t dim() const noexcept { return p_.size() + q_.size(); }

 private:
  QuasiDegenerateGroup(std::vector<std::size_t> p, std::vector<std::size_t> q)
      : p_(std::move(p)), q_(std::move(q)) {}

  std::vector<std::size_t> p_;
  std::vector<std::size_t> q_;
};

struct Projectors {
  ComplexMatrix p;
  ComplexMatrix q;
};

struct SplitPerturbation {
  ComplexMatrix diagonal;      ///< P V P + Q V Q
  ComplexMatrix off_diagonal;  ///< P V Q + Q V P
};

struct SWDecomposition {
  ComplexMatrix projector_p;
  ComplexMatrix projector_q;
  ComplexMatrix v_diag;
  ComplexMatrix v_off;
  ComplexMatrix generator_s0;
};

struct EffectiveHamiltonian {
  ComplexMatrix matrix;
  std::vector<std::string> basis_labels;
  double g = 0.0;
  int order = 2;
};

/// P = sum_{p in P} |R_p><L_p|, Q = 1 - P.
Projectors build_projectors(const BiorthogonalEigensystem& eig, const QuasiDegenerateGroup& group);

/// V_D = P V P + Q V Q and V_X = P V Q + Q V P.
SplitPerturbation split_perturbation(const ComplexMatrix& v, const Projectors& proj);

/// First-order generator S0 = P U1 Q + Q U2 P, returned in the original basis.
/// It satisfies [S0, H0] = -V_X.
///
/// Throws VanishingDenominator when some |E_q - E_p| drops below 1e-10 times
/// the spectral spread of H0.
ComplexMatrix build_generator(const BiorthogonalEigensystem& eig, const ComplexMatrix& v,
                              const QuasiDegenerateGroup& group);

/// Projectors, split perturbation and S0 in one pass.
SWDecomposition decompose(const BiorthogonalEigensystem& eig, const ComplexMatrix& v,
                          const QuasiDegenerateGroup& group);

/// Second-order effective Hamiltonian on the group,
///
///   <L_p|H_eff|R_p'> = E_p delta_pp' + g <L_p|V|R_p'>
///       - g^2/2 sum_q [1/(E_q - E_p) + 1/(E_q - E_p')] <L_p|V|R_q><L_q|V|R_p'>,
///
/// with rows/columns in the order of group.p_indices(). Denominators use the
/// unperturbed energies.
EffectiveHamiltonian effective_hamiltonian(const BiorthogonalEigensystem& eig,
                                           const ComplexMatrix& v, double g,
                                           const QuasiDegenerateGroup& group,
                                           std::vector<std::string> labels = {});

/// Off-diagonal remainder ||P H' Q|| + ||Q H' P|| of the transformed
/// Hamiltonian H' = exp(g S0) (H0 + g V) exp(-g S0), expanded in chained
/// commutators and truncated at total order `order` in g (order >= 1).
/// For a correct S0 the first-order block cancels, so the return value
/// scales as g^2 when order == 2.
double transform_check(const ComplexMatrix& h0, const ComplexMatrix& v, const ComplexMatrix& s0,
                       double g, const Projectors& proj, int order);

/// Matrix elements <L_i|A|R_j> of A in the eigenbasis.
ComplexMatrix to_eigenbasis(const BiorthogonalEigensystem& eig, const ComplexMatrix& a);

/// sum_ij |R_i> A_ij <L_j|, the inverse of `to_eigenbasis`.
ComplexMatrix from_eigenbasis(const BiorthogonalEigensystem& eig, const ComplexMatrix& a);

}  // namespace ptsw
