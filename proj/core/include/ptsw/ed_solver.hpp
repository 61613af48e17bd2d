#pragma once

// Exact diagonalization of the truncated model: spectra, parity indices,
// level tracking along one-parameter sweeps and EP2 detection.
//
// Parity of a level away from gamma = 0 is taken from the sign of
// <R|P|R> / <R|R>. For a P-pseudo-Hermitian H and a real, non-degenerate
// level this sign cannot change without the level leaving the real axis, so it
// continues the gamma = 0 parity along every real stretch of a branch.

#include <optional>
#include <vector>

#include "ptsw/linalg.hpp"
#include "ptsw/qed_model.hpp"

namespace ptsw {

/// |Im E| below this fraction of Omega counts as real.
inline constexpr double kRealTolerance = 1e-9;

BiorthogonalEigensystem full_spectrum(const SystemParams& params);

/// Eigenvalues only, sorted by eigenvalue_less.
std::vector<Complex> spectrum_values(const SystemParams& params);

/// Parity of every level of full_spectrum(params). Requires gamma == 0
/// (InvalidParams otherwise); throws ParityAmbiguous when some <v|P|v>/<v|v>
/// is not within 1e-8 of +-1.
std::vector<int> assign_parity_indices(const SystemParams& params);

/// Sign of <R|P|R>/<R|R> for real levels, 0 for complex ones or when the
/// expectation vanishes.
std::vector<int> krein_parities(const BiorthogonalEigensystem& eig, const ComplexMatrix& parity,
                                double omega);

enum class SweepParam { G, Gamma };

struct LevelBranch {
  std::vector<double> sweep_values;
  std::vector<Complex> energies;
  std::vector<int> parities;  // per point, 0 where the level is complex
  int parity_index = 0;       // parity at the first point, 0 if complex there
  std::vector<ComplexVector> vectors;  // right vectors, filled on request
};

struct TrackOptions {
  bool keep_vectors = false;
  unsigned jobs = 1;  // diagonalizations may run concurrently
};

/// Branches are indexed by level order at the first sweep value. Consecutive
/// points are matched greedily on |<R_i(k)|R_j(k+1)>| (within an exactly
/// degenerate cluster the projection onto the cluster is used) with the
/// energy jump as tie-break. Throws TrackingAmbiguous if an accepted match
/// falls below 0.5 and InvalidParams unless values are strictly increasing.
std::vector<LevelBranch> track_levels(const SystemParams& base, SweepParam param,
                                      const std::vector<double>& values,
                                      const TrackOptions& options = {});

struct EP2Location {
  double lo = 0.0;  // bracket on the sweep parameter
  double hi = 0.0;
  std::size_t branch_a = 0;
  std::size_t branch_b = 0;
  int parity_a = 0;  // taken on the real side of the bracket
  int parity_b = 0;
};

/// EP2s between two branches of the same sweep: intervals where both levels
/// pass from real to a conjugate pair (or back), bisected to relative width
/// 1e-8.
std::vector<EP2Location> detect_ep2(const LevelBranch& a, const LevelBranch& b,
                                    const SystemParams& base, SweepParam param,
                                    std::size_t index_a = 0, std::size_t index_b = 1);

/// detect_ep2 over every pair in `branches`, restricted to `subset` when it
/// is non-empty.
std::vector<EP2Location> detect_all_ep2(const std::vector<LevelBranch>& branches,
                                        const SystemParams& base, SweepParam param,
                                        const std::vector<std::size_t>& subset = {});

struct ComparisonRow {
  double g = 0.0;  // in units of Omega
  int level = 0;   // 0..2 within the resonant n = 0 triple
  Complex e_ed;
  Complex e_full;    // exact s, t, lambda form
  Complex e_approx;  // parity-basis small-gamma form
  double dre_full = 0.0, dim_full = 0.0;
  double dre_approx = 0.0, dim_approx = 0.0;
};

/// Energies in units of Omega. Effective eigenvectors are embedded into the
/// full space through the analytic group basis and matched to ED levels by
/// normalized overlap; rows come ordered by g, then by ED energy.
std::vector<ComparisonRow> compare_effective_vs_ed(const SystemParams& base,
                                                   const std::vector<double>& g_values,
                                                   double gamma);

/// ED levels matched to the eigenvectors of an effective 3x3 matrix given in
/// the state basis of the n = 0 triple. Returns, for each effective level,
/// the matched ED energy.
std::vector<Complex> match_group_levels(const SystemParams& params, const ComplexMatrix& h_eff);

}  // namespace ptsw
