#pragma once

// Two flux qubits with staggered gain/loss, longitudinally and transversely
// coupled to one resonator mode.
//
// Basis ordering is qubit-1 (x) qubit-2 (x) boson with the boson index
// slowest: index = 4 n + 2 q1 + q2, where q = 0 is spin up (sigma_z = +1).
// Qubit 1 carries +i gamma on sigma_z and qubit 2 carries -i gamma, so the
// qubit-2 eigendata are the complex conjugates of the qubit-1 eigendata.

#include <array>
#include <string>
#include <vector>

#include "ptsw/linalg.hpp"
#include "ptsw/sw_engine.hpp"

namespace ptsw {

struct SystemParams {
  double delta = 0.0;
  double epsilon = 1.0;
  double gamma = 0.0;
  double omega_r = 1.0;
  double g = 0.0;
  int n_max = 7;

  double omega() const;      // sqrt(delta^2 + epsilon^2)
  double theta() const;      // arccos(epsilon / omega)
  double detuning() const;   // omega_r - omega

  static SystemParams from_omega_theta(double omega, double theta, double gamma, double omega_r,
                                       double g, int n_max = 7);

  /// Throws InvalidParams for non-finite values, negative delta/gamma/g,
  /// omega_r <= 0, omega == 0 or n_max < 1.
  void validate() const;
};

struct SingleQubitData {
  Complex lambda;
  Eigen::Vector2cd right_plus;
  Eigen::Vector2cd right_minus;
  Eigen::RowVector2cd left_plus;
  Eigen::RowVector2cd left_minus;
  Complex s;  // <+_l|sz|+_r>
  Complex t;  // -<+_l|sz|-_r>

  /// Data of the conjugate (opposite gain/loss) qubit.
  SingleQubitData conjugated() const;
};

SingleQubitData single_qubit_data(const SystemParams& params);

ComplexMatrix build_full_hamiltonian(const SystemParams& params);
/// g = 0 part: qubits plus free resonator.
ComplexMatrix build_unperturbed_hamiltonian(const SystemParams& params);
/// (a + a^dagger)(sz1 + sz2), without the factor g.
ComplexMatrix build_interaction(int n_max);
/// Swaps the two qubit factors; identity on the boson.
ComplexMatrix parity_operator(int n_max);

enum class Branch { Plus, Minus };

struct StateLabel {
  Branch q1 = Branch::Plus;
  Branch q2 = Branch::Plus;
  int n = 0;

  std::string str() const;  // e.g. "+-~;0"
  bool operator==(const StateLabel&) const = default;
};

/// Analytic eigensystem of the g = 0 Hamiltonian, with state labels. Ordered
/// by eigenvalue_less; exact ties keep the generation order (n, q1, q2), so
/// the ordering stays deterministic at gamma = 0 where levels coincide.
struct LabeledEigensystem {
  BiorthogonalEigensystem eig;
  std::vector<StateLabel> labels;

  std::size_t index_of(const StateLabel& label) const;
};

LabeledEigensystem unperturbed_eigensystem(const SystemParams& params);

/// The resonant group around boson number n: |+ -~; n>, |- +~; n>,
/// |- -~; n+1> and, for n >= 1, |+ +~; n-1>.
struct GroupBasis {
  std::vector<StateLabel> labels;
  ComplexMatrix rights;  // columns
  ComplexMatrix lefts;   // rows
  ComplexVector energies;
};

GroupBasis resonant_group_basis(const SystemParams& params, int n);

/// Group indices of resonant_group_basis(params, n) inside `sys`.
QuasiDegenerateGroup resonant_group(const LabeledEigensystem& sys, int n);

/// Closed-form 3x3 effective Hamiltonian of the n = 0 triple, exact s, t, lambda.
EffectiveHamiltonian effective_matrix_full(const SystemParams& params);

/// The same matrix from the generic second-order reduction applied to the
/// truncated model, for the group around boson number n.
EffectiveHamiltonian effective_matrix_numeric(const SystemParams& params, int n = 0);

/// Small-gamma simplification in the parity basis (bright, dark, photon).
EffectiveHamiltonian effective_matrix_approx(const SystemParams& params);

/// F H F with F rows (1, 1, 0)/sqrt2, (1, -1, 0)/sqrt2, (0, 0, 1).
/// F is its own inverse.
ComplexMatrix parity_transform(const ComplexMatrix& h);
ComplexMatrix parity_basis_matrix();

/// Parity of the 3x3 group in the state basis: swaps states 1 and 2.
ComplexMatrix group_parity_matrix();
/// Parity in the parity basis, diag(1, -1, 1).
ComplexMatrix group_parity_matrix_diagonal();

/// (sz1 + sz2) applied to a two-spin state. Coefficients on the state itself,
/// on the state with qubit 1 flipped and on the state with qubit 2 flipped.
struct SigmaAction {
  Complex self;
  Complex flip_q1;
  Complex flip_q2;
};

/// Label is one of "+-", "-+", "--", "++", optionally followed by "~".
/// Throws InvalidLabel otherwise.
SigmaAction two_spin_sigma_action(const SingleQubitData& data, const std::string& label);

}  // namespace ptsw
