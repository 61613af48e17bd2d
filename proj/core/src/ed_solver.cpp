#include "ptsw/ed_solver.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "ptsw/cubic_spectral.hpp"
#include "ptsw/error.hpp"

namespace ptsw {

namespace {

constexpr double kParityTolerance = 1e-8;
constexpr double kDegenerateTolerance = 1e-8;
constexpr double kTrackingFloor = 0.5;
constexpr double kConjugatePairTolerance = 1e-6;
constexpr double kBisectionWidth = 1e-8;

SystemParams with_sweep(SystemParams p, SweepParam param, double value) {
  (param == SweepParam::G ? p.g : p.gamma) = value;
  return p;
}

struct Match {
  double score;
  double jump;
  std::size_t from;
  std::size_t to;
};

// Greedy one-to-one assignment on descending score (quantized so that
// near-ties fall through to the smaller energy jump).
std::vector<std::size_t> greedy_assign(std::vector<Match> cand, std::size_t n_from,
                                       std::size_t n_to, double floor, bool enforce_floor) {
  for (auto& c : cand) c.score = std::round(c.score * 1e6) / 1e6;
  std::sort(cand.begin(), cand.end(), [](const Match& a, const Match& b) {
    return std::tie(b.score, a.jump, a.from, a.to) < std::tie(a.score, b.jump, b.from, b.to);
  });
  std::vector<std::size_t> out(n_from, n_to);
  std::vector<bool> taken(n_to, false);
  std::size_t done = 0;
  for (const auto& c : cand) {
    if (done == n_from) break;
    if (out[c.from] != n_to || taken[c.to]) continue;
    if (enforce_floor && c.score < floor) {
      throw Error(ErrorCode::TrackingAmbiguous,
                  "best eigenvector overlap " + std::to_string(c.score) +
                      " below 0.5; refine the sweep");
    }
    out[c.from] = c.to;
    taken[c.to] = true;
    ++done;
  }
  return out;
}

// Similarity between previous and next right vectors. Inside an exactly
// degenerate cluster the previous basis is arbitrary, so a next vector is
// scored by its projection onto the whole cluster.
Eigen::MatrixXd similarity(const BiorthogonalEigensystem& prev, const BiorthogonalEigensystem& next,
                           double scale) {
  const Eigen::Index n = prev.dim();
  Eigen::MatrixXd sim(n, next.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> same;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(prev.values(i) - prev.values(j)) <= kDegenerateTolerance * scale) same.push_back(j);
    }
    if (same.size() == 1) {
      for (Eigen::Index j = 0; j < next.dim(); ++j) {
        sim(i, j) = std::abs(prev.rights.col(i).dot(next.rights.col(j)));
      }
      continue;
    }
    ComplexMatrix block(n, static_cast<Eigen::Index>(same.size()));
    for (std::size_t k = 0; k < same.size(); ++k) {
      block.col(static_cast<Eigen::Index>(k)) = prev.rights.col(same[k]);
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(block);
    const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, block.cols());
    for (Eigen::Index j = 0; j < next.dim(); ++j) {
      sim(i, j) = (q.adjoint() * next.rights.col(j)).norm();
    }
  }
  return sim;
}

bool is_real(Complex e, double omega) { return std::abs(e.imag()) < kRealTolerance * omega; }

enum class PairState { Real, Conjugate, Other };

PairState pair_state(Complex a, Complex b, double omega) {
  if (is_real(a, omega) && is_real(b, omega)) return PairState::Real;
  if (!is_real(a, omega) && !is_real(b, omega) &&
      std::abs(a - std::conj(b)) < kConjugatePairTolerance * omega) {
    return PairState::Conjugate;
  }
  return PairState::Other;
}

// Whether the two levels closest to `center` form a conjugate pair.
bool broken_near(const SystemParams& params, Complex center) {
  auto values = spectrum_values(params);
  std::partial_sort(values.begin(), values.begin() + 2, values.end(),
                    [&](Complex x, Complex y) { return std::abs(x - center) < std::abs(y - center); });
  return pair_state(values[0], values[1], params.omega()) == PairState::Conjugate;
}

ComplexVector unit(const ComplexVector& v) { return v / v.norm(); }

// For each column of `embedded`, the ED level with the best normalized
// overlap, restricted to `allowed` when non-empty.
std::vector<std::size_t> match_to_ed(const BiorthogonalEigensystem& ed, const ComplexMatrix& embedded,
                                     const std::vector<std::size_t>& allowed) {
  std::vector<std::size_t> pool = allowed;
  if (pool.empty()) {
    for (Eigen::Index i = 0; i < ed.dim(); ++i) pool.push_back(static_cast<std::size_t>(i));
  }
  std::vector<Match> cand;
  for (Eigen::Index k = 0; k < embedded.cols(); ++k) {
    const ComplexVector v = unit(embedded.col(k));
    for (std::size_t p = 0; p < pool.size(); ++p) {
      const auto i = static_cast<Eigen::Index>(pool[p]);
      cand.push_back({std::abs(ed.rights.col(i).dot(v)), 0.0, static_cast<std::size_t>(k), p});
    }
  }
  auto local = greedy_assign(std::move(cand), static_cast<std::size_t>(embedded.cols()), pool.size(),
                             0.0, false);
  for (auto& l : local) l = pool[l];
  return local;
}

// Group basis vectors carried back to the full problem: eigenvectors of H are
// exp(-g S0) applied to those of the block-diagonal transformed H. Expanded to
// second order, which keeps the overlaps with dressed ED states large even
// where the bare states have lost most of their weight.
ComplexMatrix dressed_group_rights(const SystemParams& params, const GroupBasis& basis) {
  const LabeledEigensystem sys = unperturbed_eigensystem(params);
  const QuasiDegenerateGroup group = resonant_group(sys, 0);
  const ComplexMatrix gs = params.g * build_generator(sys.eig, build_interaction(params.n_max), group);
  const auto n = gs.rows();
  const ComplexMatrix dress = ComplexMatrix::Identity(n, n) - gs + 0.5 * gs * gs;
  return dress * basis.rights;
}

}  // namespace

BiorthogonalEigensystem full_spectrum(const SystemParams& params) {
  return eigendecompose(build_full_hamiltonian(params));
}

std::vector<Complex> spectrum_values(const SystemParams& params) {
  const ComplexMatrix h = build_full_hamiltonian(params);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(h, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "QR iteration failed on the full Hamiltonian");
  }
  auto values = to_std(solver.eigenvalues());
  std::sort(values.begin(), values.end(), eigenvalue_less);
  return values;
}

std::vector<int> krein_parities(const BiorthogonalEigensystem& eig, const ComplexMatrix& parity,
                                double omega) {
  std::vector<int> out(static_cast<std::size_t>(eig.dim()), 0);
  for (Eigen::Index i = 0; i < eig.dim(); ++i) {
    if (!is_real(eig.values(i), omega)) continue;
    const ComplexVector& r = eig.rights.col(i);
    const double x = r.dot(parity * r).real() / r.squaredNorm();
    if (std::abs(x) > kParityTolerance) out[static_cast<std::size_t>(i)] = x > 0.0 ? 1 : -1;
  }
  return out;
}

std::vector<int> assign_parity_indices(const SystemParams& params) {
  if (params.gamma != 0.0) {
    throw Error(ErrorCode::InvalidParams, "parity indices are defined at gamma = 0");
  }
  const auto eig = full_spectrum(params);
  const ComplexMatrix p = parity_operator(params.n_max);
  std::vector<int> out;
  for (Eigen::Index i = 0; i < eig.dim(); ++i) {
    const ComplexVector& v = eig.rights.col(i);
    const double x = v.dot(p * v).real() / v.squaredNorm();
    if (std::abs(std::abs(x) - 1.0) > kParityTolerance) {
      throw Error(ErrorCode::ParityAmbiguous,
                  "level " + std::to_string(i) + " has <P> = " + std::to_string(x) +
                      " (accidental degeneracy?)");
    }
    out.push_back(x > 0.0 ? 1 : -1);
  }
  return out;
}

std::vector<LevelBranch> track_levels(const SystemParams& base, SweepParam param,
                                      const std::vector<double>& values,
                                      const TrackOptions& options) {
  if (values.empty()) throw Error(ErrorCode::InvalidParams, "empty sweep");
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (!(values[k] > values[k - 1]) && values[k] != values[k - 1]) {
      throw Error(ErrorCode::InvalidParams, "sweep values must be increasing");
    }
  }
  const double omega = base.omega();
  std::vector<BiorthogonalEigensystem> spectra(values.size());
  parallel_for(values.size(), options.jobs,
               [&](std::size_t k) { spectra[k] = full_spectrum(with_sweep(base, param, values[k])); });
  const ComplexMatrix parity = parity_operator(base.n_max);

  const auto n = static_cast<std::size_t>(spectra.front().dim());
  std::vector<LevelBranch> branches(n);
  // slot[b] = level index of branch b at the current point
  std::vector<std::size_t> slot(n);
  for (std::size_t b = 0; b < n; ++b) slot[b] = b;

  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto& eig = spectra[k];
    if (k > 0) {
      const auto& prev = spectra[k - 1];
      const Eigen::MatrixXd sim = similarity(prev, eig, omega);
      std::vector<Match> cand;
      cand.reserve(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const auto ii = static_cast<Eigen::Index>(i);
          const auto jj = static_cast<Eigen::Index>(j);
          cand.push_back({sim(ii, jj), std::abs(prev.values(ii) - eig.values(jj)), i, j});
        }
      }
      const auto next_of = greedy_assign(std::move(cand), n, n, kTrackingFloor, true);
      for (auto& s : slot) s = next_of[s];
    }
    const auto parities = krein_parities(eig, parity, omega);
    for (std::size_t b = 0; b < n; ++b) {
      const auto level = static_cast<Eigen::Index>(slot[b]);
      auto& br = branches[b];
      br.sweep_values.push_back(values[k]);
      br.energies.push_back(eig.values(level));
      br.parities.push_back(parities[slot[b]]);
      if (options.keep_vectors) br.vectors.push_back(eig.rights.col(level));
    }
  }
  for (auto& br : branches) br.parity_index = br.parities.front();
  return branches;
}

std::vector<EP2Location> detect_ep2(const LevelBranch& a, const LevelBranch& b,
                                    const SystemParams& base, SweepParam param,
                                    std::size_t index_a, std::size_t index_b) {
  const double omega = base.omega();
  std::vector<EP2Location> out;
  const std::size_t n = std::min(a.energies.size(), b.energies.size());
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const PairState s0 = pair_state(a.energies[k], b.energies[k], omega);
    const PairState s1 = pair_state(a.energies[k + 1], b.energies[k + 1], omega);
    const bool opening = s0 == PairState::Real && s1 == PairState::Conjugate;
    const bool closing = s0 == PairState::Conjugate && s1 == PairState::Real;
    if (!opening && !closing) continue;

    const std::size_t real_side = opening ? k : k + 1;
    const Complex c0 = 0.5 * (a.energies[k] + b.energies[k]);
    const Complex c1 = 0.5 * (a.energies[k + 1] + b.energies[k + 1]);
    double lo = a.sweep_values[k];
    double hi = a.sweep_values[k + 1];
    const double x0 = lo, x1 = hi;
    // Invariant: lo has the pair state of point k, hi that of point k + 1.
    while (hi - lo > kBisectionWidth * std::max({std::abs(lo), std::abs(hi), 1e-300})) {
      const double mid = 0.5 * (lo + hi);
      const double t = (mid - x0) / (x1 - x0);
      const Complex center{(c0 + t * (c1 - c0)).real(), 0.0};
      const bool broken = broken_near(with_sweep(base, param, mid), center);
      ((broken == (s0 == PairState::Conjugate)) ? lo : hi) = mid;
    }
    out.push_back({lo, hi, index_a, index_b, a.parities[real_side], b.parities[real_side]});
  }
  return out;
}

std::vector<EP2Location> detect_all_ep2(const std::vector<LevelBranch>& branches,
                                        const SystemParams& base, SweepParam param,
                                        const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> ids = subset;
  if (ids.empty()) {
    for (std::size_t i = 0; i < branches.size(); ++i) ids.push_back(i);
  }
  std::vector<EP2Location> out;
  for (std::size_t x = 0; x < ids.size(); ++x) {
    for (std::size_t y = x + 1; y < ids.size(); ++y) {
      auto found = detect_ep2(branches[ids[x]], branches[ids[y]], base, param, ids[x], ids[y]);
      out.insert(out.end(), found.begin(), found.end());
    }
  }
  std::sort(out.begin(), out.end(), [](const EP2Location& l, const EP2Location& r) {
    return std::tie(l.lo, l.branch_a, l.branch_b) < std::tie(r.lo, r.branch_a, r.branch_b);
  });
  return out;
}

std::vector<Complex> match_group_levels(const SystemParams& params, const ComplexMatrix& h_eff) {
  const auto ed = full_spectrum(params);
  const GroupBasis basis = resonant_group_basis(params, 0);
  const auto eff = eigendecompose(h_eff);
  const auto matched = match_to_ed(ed, dressed_group_rights(params, basis) * eff.rights, {});
  std::vector<Complex> out;
  for (const auto i : matched) out.push_back(ed.values(static_cast<Eigen::Index>(i)));
  return out;
}

std::vector<ComparisonRow> compare_effective_vs_ed(const SystemParams& base,
                                                   const std::vector<double>& g_values,
                                                   double gamma) {
  const double omega = base.omega();
  const ComplexMatrix f = parity_basis_matrix();
  std::vector<ComparisonRow> rows;
  for (const double g : g_values) {
    SystemParams p = base;
    p.g = g;
    p.gamma = gamma;
    const auto ed = full_spectrum(p);
    const GroupBasis basis = resonant_group_basis(p, 0);
    const auto full = eigendecompose(effective_matrix_full(p).matrix);
    const auto approx = eigendecompose(effective_matrix_approx(p).matrix);

    const ComplexMatrix dressed = dressed_group_rights(p, basis);
    const auto ed_of_full = match_to_ed(ed, dressed * full.rights, {});
    const auto ed_of_approx = match_to_ed(ed, dressed * f * approx.rights, ed_of_full);

    std::vector<ComparisonRow> block;
    for (std::size_t k = 0; k < ed_of_full.size(); ++k) {
      ComparisonRow r;
      r.g = g / omega;
      const auto level = ed_of_full[k];
      r.e_ed = ed.values(static_cast<Eigen::Index>(level)) / omega;
      r.e_full = full.values(static_cast<Eigen::Index>(k)) / omega;
      const auto ka = static_cast<Eigen::Index>(
          std::find(ed_of_approx.begin(), ed_of_approx.end(), level) - ed_of_approx.begin());
      r.e_approx = approx.values(ka) / omega;
      r.dre_full = std::abs(r.e_ed.real() - r.e_full.real());
      r.dim_full = std::abs(r.e_ed.imag() - r.e_full.imag());
      r.dre_approx = std::abs(r.e_ed.real() - r.e_approx.real());
      r.dim_approx = std::abs(r.e_ed.imag() - r.e_approx.imag());
      block.push_back(r);
    }
    std::sort(block.begin(), block.end(), [](const ComparisonRow& x, const ComparisonRow& y) {
      return eigenvalue_less(x.e_ed, y.e_ed);
    });
    for (std::size_t k = 0; k < block.size(); ++k) block[k].level = static_cast<int>(k);
    rows.insert(rows.end(), block.begin(), block.end());
  }
  return rows;
}

}  // namespace ptsw
