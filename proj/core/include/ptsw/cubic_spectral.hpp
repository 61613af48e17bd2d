#pragma once

// Characteristic-polynomial analysis of the 3x3 effective Hamiltonian.
//
// The cubic det(E - H) = E^3 + b E^2 + c E + d is reduced with
// E = Omega * Et + shift, shift = -b/3 = tr H / 3, to the dimensionless form
// Et^3 + 3 p Et + 2 q = 0. For a PT-symmetric H the coefficients are real and
// the sign of p^3 + q^2 decides the spectrum. Negative gives three real
// levels; positive gives a conjugate pair next to one real level. The zero
// set is the EP2 line, which ends in a cusp at the EP3 p = q = 0.

#include <array>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "ptsw/linalg.hpp"
#include "ptsw/qed_model.hpp"

namespace ptsw {

inline constexpr double kClassifyTolerance = 1e-8;

struct CubicCoeffs {
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double imag_leak = 0.0;  // largest |Im| dropped from b, c, d
};

struct DepressedCubic {
  double p = 0.0;
  double q = 0.0;
  double shift = 0.0;  // energy offset, -b/3
  double scale = 1.0;  // Omega
};

enum class SpectrumTag { ThreeReal, OneRealConjugatePair, EP2, EP3 };
std::string_view to_string(SpectrumTag tag) noexcept;

struct SpectrumClass {
  SpectrumTag tag = SpectrumTag::ThreeReal;
  double discriminant = 0.0;  // p^3 + q^2
};

struct CardanoResult {
  std::array<Complex, 3> roots;  // dimensionless, fixed order E1, E2, E3
  Complex alpha;
  Complex beta;
};

/// Which 3x3 matrix the spectral analysis runs on.
enum class EffectiveModel {
  Approx,  // small-gamma parity-basis form (default)
  Full,    // exact s, t, lambda form
};

/// Throws NotPTSymmetric when the imaginary parts reach 1e-8 and
/// DimensionMismatch for anything but 3x3.
CubicCoeffs char_poly_coeffs(const ComplexMatrix& h);

DepressedCubic depress(const CubicCoeffs& coeffs, double omega);

/// Roots of Et^3 + 3 p Et + 2 q. alpha is the real cube root of
/// -q + sqrt(p^3 + q^2) for a real radicand and the principal one otherwise,
/// and beta = -p / alpha. When that radicand cancels, beta is taken from
/// -q - sqrt(p^3 + q^2) and alpha = -p / beta instead.
CardanoResult cardano(const DepressedCubic& dc);
std::array<Complex, 3> cardano_roots(const DepressedCubic& dc);
/// Roots mapped back to energies, E = scale * Et + shift.
std::array<Complex, 3> cardano_energies(const DepressedCubic& dc);

SpectrumClass classify(const DepressedCubic& dc, double tol = kClassifyTolerance);

ComplexMatrix effective_matrix(const SystemParams& params, EffectiveModel model);
DepressedCubic depressed_cubic(const SystemParams& params, EffectiveModel model);

struct CriticalScaling {
  double g_cr = 0.0;       // sqrt(delta_omega * omega) / 2
  double gamma_cr = 0.0;   // g_cr * theta / sqrt(2)
  double g_tilde_sq = 0.0; // (delta_omega / omega) / u2, pre-asymptotic form
  double u2 = 0.0;
};

/// Throws InvalidParams unless delta_omega > 0, omega > 0, 0 < theta < pi/2.
CriticalScaling critical_scaling(double delta_omega, double theta, double omega);

struct PQSolution {
  double g = 0.0;
  double gamma = 0.0;
  double residual = 0.0;  // |p - p*| + |q - q*|
  int iterations = 0;
};

/// Newton iteration on (g, gamma) -> (p, q) - target with a central
/// finite-difference Jacobian (relative step 1e-7). Converged when the
/// residual drops below `tol`; NoConvergence after 50 iterations.
PQSolution solve_pq(const SystemParams& base, double target_p, double target_q,
                    std::pair<double, double> guess, EffectiveModel model = EffectiveModel::Approx,
                    double tol = 1e-12);

struct EP3Report {
  double g_cr = 0.0;
  double gamma_cr = 0.0;
  Complex triple_energy;
  bool rank_ok = false;
  double residual = 0.0;
  double rank_minor = 0.0;  // largest |2x2 minor| of H - E'
  int iterations = 0;
};

/// Locates p = q = 0 in the (g, gamma) plane. Without a guess the Newton
/// iteration starts from critical_scaling. Throws RankDeficient when every
/// second-order minor of H - E' vanishes (below 1e-12).
EP3Report find_ep3(const SystemParams& base,
                   std::optional<std::pair<double, double>> guess = std::nullopt,
                   EffectiveModel model = EffectiveModel::Approx);

struct PerturbationResult {
  int case_id = 0;  // 1: along p^3+q^2 = 0, 2: q = 0 p < 0, 3: q = 0 p > 0, 4: |p|^3 << q^2
  std::array<Complex, 3> roots;
  double bound = 0.0;  // a-priori error of the closed form; 0 for exact cases
};

/// Picks the closed-form root pattern matching (p, q). Case 4 neglects p and
/// carries the error bound 2|p| / |2q|^(1/3). Throws AmbiguousCase when no
/// case, or the degenerate point p = q = 0, matches.
PerturbationResult perturbation_case(const DepressedCubic& dc, double tol = 1e-6);

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
};

using Polyline = std::vector<std::pair<double, double>>;  // (g/Omega, gamma/Omega)

/// Zero set of p^3 + q^2 on a grid over (g/Omega, gamma/Omega), by marching
/// squares with each edge crossing refined by bracketed root search.
/// Throws InvalidParams for grids below 16 per axis and EmptyContour when no
/// sign change exists.
std::vector<Polyline> trace_ep2_line(const SystemParams& base, AxisRange g_range,
                                     AxisRange gamma_range, int n_g, int n_gamma,
                                     EffectiveModel model = EffectiveModel::Approx,
                                     unsigned jobs = 1);

struct PhaseNode {
  double g = 0.0;      // in units of Omega
  double gamma = 0.0;  // in units of Omega
  double max_im = 0.0;
  double min_dist = 0.0;
  SpectrumTag tag = SpectrumTag::ThreeReal;
};

/// Nodes ordered gamma-major: index = i_gamma * n_g + i_g.
struct PhaseDiagram {
  int n_g = 0;
  int n_gamma = 0;
  std::vector<PhaseNode> nodes;

  const PhaseNode& at(int i_g, int i_gamma) const {
    return nodes[static_cast<std::size_t>(i_gamma * n_g + i_g)];
  }
};

PhaseDiagram phase_diagram(const SystemParams& base, AxisRange g_range, AxisRange gamma_range,
                           int n_g, int n_gamma, EffectiveModel model = EffectiveModel::Approx,
                           unsigned jobs = 1);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Each index is
/// visited exactly once; callers write results by index.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn);

}  // namespace ptsw

#include "ptsw/detail/parallel.hpp"
