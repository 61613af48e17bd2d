// Acceptance suite. One line per criterion; exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ptsw/cubic_spectral.hpp"
#include "ptsw/ed_solver.hpp"
#include "ptsw/error.hpp"
#include "ptsw/qed_model.hpp"
#include "ptsw/sw_engine.hpp"

using namespace ptsw;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SystemParams standard(double gamma = 0.0, double g = 0.0, double omega_r = 1.07,
                      double theta = pi / 40) {
  return SystemParams::from_omega_theta(1.0, theta, gamma, omega_r, g);
}

std::vector<Complex> as_vec(const std::array<Complex, 3>& a) { return {a.begin(), a.end()}; }

unsigned jobs() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome ep3_reproduction() {
  const auto rep = find_ep3(standard());
  const double eg = std::abs(rep.g_cr / 0.1375 - 1.0);
  const double eq = std::abs(rep.gamma_cr / 7.65e-3 - 1.0);
  return {eg <= 0.01 && eq <= 0.01 && rep.rank_ok,
          fmt("g_cr=%.6f (%.2f%%) gamma_cr=%.6e (%.2f%%) rank_ok=%s", rep.g_cr, 100 * eg,
              rep.gamma_cr, 100 * eq, rep.rank_ok ? "true" : "false")};
}

Outcome critical_scaling_law() {
  std::vector<double> lx, ly;
  double worst_ratio = 0.0;
  const double theta = pi / 40;
  for (double dw : {0.03, 0.05, 0.07, 0.10}) {
    const auto rep = find_ep3(standard(0.0, 0.0, 1.0 + dw));
    lx.push_back(std::log(dw));
    ly.push_back(std::log(rep.g_cr));
    worst_ratio = std::max(worst_ratio, std::abs(rep.gamma_cr / rep.g_cr / (theta / std::sqrt(2.0)) - 1.0));
  }
  const double s = slope(lx, ly);
  return {std::abs(s - 0.5) <= 0.05 && worst_ratio <= 0.10,
          fmt("exponent=%.4f, worst |gamma_cr/g_cr / (theta/sqrt2) - 1|=%.3f", s, worst_ratio)};
}

Outcome agreement_window() {
  bool ok = true;
  std::string detail;
  for (double gamma : {0.0, 0.004, 0.008}) {
    std::vector<double> gs;
    for (int i = 0; i <= 40; ++i) gs.push_back(0.01 * i);
    const auto rows = compare_effective_vs_ed(standard(), gs, gamma);
    double below_max = 0.0, overall = 0.0, first = -1.0;
    for (const auto& r : rows) {
      overall = std::max(overall, r.dre_full);
      if (r.g <= 0.12 + 1e-12) below_max = std::max(below_max, r.dre_full);
      if (first < 0 && r.dre_full > 1e-2) first = r.g;
    }
    ok &= below_max < 1e-2 && (first < 0 || first >= 0.13 - 1e-12);
    detail += fmt("%sgamma=%.3f: max<=0.12 %.2e, max<=0.4 %.2e, first>1e-2 %s", detail.empty() ? "" : "; ",
                  gamma, below_max, overall, first < 0 ? "never" : fmt("%.2f", first).c_str());
  }
  return {ok, detail};
}

double order_slope(const SystemParams& base) {
  std::vector<double> lx, ly;
  for (double g : {0.01, 0.02, 0.04}) {
    auto p = base;
    p.g = g;
    const auto heff = effective_matrix_numeric(p, 0);
    const auto eff = eigendecompose(heff.matrix);
    const auto ed = match_group_levels(p, heff.matrix);
    double err = 0.0;
    for (Eigen::Index k = 0; k < eff.dim(); ++k)
      err = std::max(err, std::abs(eff.values(k) - ed[static_cast<std::size_t>(k)]));
    lx.push_back(std::log(g));
    ly.push_back(std::log(err));
  }
  return slope(lx, ly);
}

Outcome sw_order() {
  // At resonance with a generic mixing angle the third-order correction is
  // nonzero. At the longitudinal reference point it is suppressed and the
  // residual is quartic; both are printed.
  const double generic = order_slope(standard(0.001, 0.0, 1.0, pi / 4));
  const double reference = order_slope(standard(0.004));
  return {generic >= 2.7 && generic <= 3.3,
          fmt("slope=%.3f at omega_r=Omega theta=pi/4 gamma=0.001; %.3f at omega_r=1.07 theta=pi/40",
              generic, reference)};
}

Outcome analytic_identity() {
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const auto p = standard(0.02 * j / 4, 0.1 * i / 4);
      const ComplexMatrix d = effective_matrix_full(p).matrix - effective_matrix_numeric(p, 0).matrix;
      worst = std::max(worst, d.cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-10, fmt("max entrywise difference %.2e over 5x5 grid", worst)};
}

Outcome parity_rule() {
  std::vector<double> gs;
  for (int i = 0; i <= 400; ++i) gs.push_back(0.4 * i / 400);
  int total = 0, violations = 0;
  std::string per;
  for (double gamma : {0.004, 0.008, 0.012}) {
    const auto base = standard(gamma);
    TrackOptions opt;
    opt.jobs = jobs();
    const auto br = track_levels(base, SweepParam::G, gs, opt);
    const auto eps = detect_all_ep2(br, base, SweepParam::G);
    for (const auto& e : eps) violations += !(e.parity_a != 0 && e.parity_a == -e.parity_b);
    total += static_cast<int>(eps.size());
    per += fmt("%s%zu", per.empty() ? "" : "/", eps.size());
  }
  return {violations == 0 && total > 0,
          fmt("%d EP2s (%s per gamma) on 401-point sweeps, %d violations", total, per.c_str(), violations)};
}

Outcome cardano_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> d;
  const ComplexMatrix par = group_parity_matrix();
  double worst_root = 0.0, worst_branch = 0.0;
  for (int k = 0; k < 10000; ++k) {
    ComplexMatrix a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = Complex{d(rng), d(rng)};
    // PT-symmetric: invariant under swap of states 1, 2 plus conjugation.
    const ComplexMatrix h = 0.5 * (a + par * a.conjugate() * par);
    const DepressedCubic dc = depress(char_poly_coeffs(h), 1.0);
    const CardanoResult cr = cardano(dc);
    worst_branch = std::max(worst_branch, std::abs(cr.alpha * cr.beta + dc.p));
    worst_root = std::max(worst_root, multiset_distance(as_vec(cardano_energies(dc)),
                                                        to_std(eigendecompose(h).values)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst_root < 1e-9 && worst_branch < 1e-12 && secs < 30.0,
          fmt("1e4 matrices: max root error %.2e, max |alpha*beta+p| %.2e, %.2fs", worst_root,
              worst_branch, secs)};
}

Outcome phase_structure() {
  const auto rep = find_ep3(standard());
  const AxisRange gr{0.0, 0.3}, yr{0.0, 0.02};
  const int n = 121;
  const double hg = (gr.hi - gr.lo) / (n - 1), hy = (yr.hi - yr.lo) / (n - 1);
  const auto lines = trace_ep2_line(standard(), gr, yr, n, n, EffectiveModel::Approx, jobs());

  // Closest contour vertex to the p = q = 0 point, in grid cells.
  double best = 1e300;
  std::size_t best_line = 0, best_idx = 0;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    for (std::size_t i = 0; i < lines[l].size(); ++i) {
      const double dx = (lines[l][i].first - rep.g_cr) / hg, dy = (lines[l][i].second - rep.gamma_cr) / hy;
      const double dist = std::hypot(dx, dy);
      if (dist < best) best = dist, best_line = l, best_idx = i;
    }
  }
  const bool through = best <= std::sqrt(2.0);

  // Fold: gamma along the polyline reaches a local maximum at the EP3, so
  // the tangent reverses in gamma there.
  bool fold = false;
  double fold_g = 0.0, fold_y = 0.0;
  if (through) {
    const auto& line = lines[best_line];
    const std::size_t w = 6;
    const std::size_t lo = best_idx >= w ? best_idx - w : 0, hi = std::min(line.size() - 1, best_idx + w);
    std::size_t top = lo;
    for (std::size_t i = lo; i <= hi; ++i)
      if (line[i].second > line[top].second) top = i;
    fold_g = line[top].first;
    fold_y = line[top].second;
    const bool interior = top > lo && top < hi;
    const bool rises = line[lo].second < fold_y - 0.5 * hy && line[hi].second < fold_y - 0.5 * hy;
    const bool at_ep3 = std::abs(fold_g - rep.g_cr) <= 2 * hg && std::abs(fold_y - rep.gamma_cr) <= 2 * hy;
    fold = interior && rises && at_ep3;
  }
  return {through && fold,
          fmt("%zu polylines; nearest vertex %.2f cells from p=q=0; gamma fold at (%.4f, %.5f) vs EP3 "
              "(%.4f, %.5f)",
              lines.size(), best, fold_g, fold_y, rep.g_cr, rep.gamma_cr)};
}

Outcome symmetry_suite() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> th(0.05, 1.5), ga(0.0, 0.03), wr(0.8, 1.3), gg(0.0, 0.3);
  std::uniform_int_distribution<int> nm(3, 7);
  double w_ph = 0, w_leak = 0, w_conj = 0, w_real = 0;
  for (int k = 0; k < 100; ++k) {
    auto p = SystemParams::from_omega_theta(1.0, th(rng), ga(rng), wr(rng), gg(rng), nm(rng));
    const ComplexMatrix h = build_full_hamiltonian(p);
    const ComplexMatrix pm = parity_operator(p.n_max);
    w_ph = std::max(w_ph, (pm * h * pm - h.adjoint()).cwiseAbs().maxCoeff());
    const ComplexMatrix hf = effective_matrix_full(p).matrix;
    const ComplexMatrix ha = effective_matrix_approx(p).matrix;
    const ComplexMatrix pg = group_parity_matrix(), pd = group_parity_matrix_diagonal();
    w_ph = std::max(w_ph, (pg * hf * pg - hf.adjoint()).cwiseAbs().maxCoeff());
    w_ph = std::max(w_ph, (pd * ha * pd - ha.adjoint()).cwiseAbs().maxCoeff());
    w_leak = std::max({w_leak, char_poly_coeffs(hf).imag_leak, char_poly_coeffs(ha).imag_leak});
    for (const ComplexMatrix* m : {&h, &hf, &ha}) {
      const auto e = to_std(eigendecompose(*m).values);
      std::vector<Complex> c;
      for (const auto& x : e) c.push_back(std::conj(x));
      w_conj = std::max(w_conj, multiset_distance(e, c));
    }
    p.gamma = 0.0;
    for (const auto& x : spectrum_values(p)) w_real = std::max(w_real, std::abs(x.imag()));
  }
  return {w_ph < 1e-12 && w_leak < 1e-10 && w_conj < 1e-10 && w_real < 1e-10,
          fmt("100 draws: pseudo-Hermiticity %.1e, coefficient leak %.1e, conjugation %.1e, gamma=0 Im %.1e",
              w_ph, w_leak, w_conj, w_real)};
}

Outcome perturbation_patterns() {
  // Twelve rays out of p = q = 0: q = 0 with p < 0 and p > 0, the two
  // branches of p^3 + q^2 = 0, and eight generic directions q/p = const,
  // which at small radius all satisfy |p|^3 << q^2.
  struct Target {
    const char* name;
    int expect;
    DepressedCubic dc;
  };
  std::vector<Target> targets;
  const double r = 1e-2;
  targets.push_back({"q=0,p<0", 2, {-r * r, 0.0, 0.0, 1.0}});
  targets.push_back({"q=0,p>0", 3, {r * r, 0.0, 0.0, 1.0}});
  targets.push_back({"EP2 q>0", 1, {-r * r, r * r * r, 0.0, 1.0}});
  targets.push_back({"EP2 q<0", 1, {-r * r, -r * r * r, 0.0, 1.0}});
  for (int k = 0; k < 8; ++k) {
    const double phi = pi / 8 + k * pi / 4;  // avoids q = 0
    const double s = std::sin(phi), c = std::cos(phi);
    // Radius that keeps |p|^3 a factor 1e-3 inside the case-4 tolerance.
    const double rho = 1e-9 * s * s / std::max(std::abs(c * c * c), 1e-3);
    targets.push_back({"q/p const", 4, {rho * c, rho * s, 0.0, 1.0}});
  }

  int ok = 0;
  double worst_exact = 0.0, worst_ratio = 0.0;
  for (const auto& t : targets) {
    try {
      const auto res = perturbation_case(t.dc);
      const double err = multiset_distance(as_vec(res.roots), as_vec(cardano_roots(t.dc)));
      bool good = res.case_id == t.expect;
      if (t.expect == 4) {
        good &= err <= res.bound;
        worst_ratio = std::max(worst_ratio, err / res.bound);
      } else {
        good &= err < 1e-9;
        worst_exact = std::max(worst_exact, err);
      }
      ok += good;
    } catch (const Error&) {
    }
  }

  // The non-generic rays sit at |p| ~ 1e-4, |q| ~ 1e-6, which the matrix
  // reaches close to the EP3; map them back to (g, gamma) for orientation.
  const auto rep = find_ep3(standard());
  double max_dg = 0.0, max_dy = 0.0;
  int mapped = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    try {
      const auto sol = solve_pq(standard(), targets[i].dc.p, targets[i].dc.q, {rep.g_cr, rep.gamma_cr});
      max_dg = std::max(max_dg, std::abs(sol.g - rep.g_cr));
      max_dy = std::max(max_dy, std::abs(sol.gamma - rep.gamma_cr));
      ++mapped;
    } catch (const Error&) {
    }
  }
  return {ok == static_cast<int>(targets.size()),
          fmt("%d/12 rays: exact cases max error %.1e, case 4 max error/bound %.2f; %d/4 special rays "
              "realized at |dg|<=%.1e, |dgamma|<=%.1e from the EP3",
              ok, worst_exact, worst_ratio, mapped, max_dg, max_dy)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"EP3 reproduction", ep3_reproduction},
      {"critical-scaling law", critical_scaling_law},
      {"effective-vs-ED agreement window", agreement_window},
      {"SW order property", sw_order},
      {"analytic-numeric identity", analytic_identity},
      {"parity selection rule", parity_rule},
      {"Cardano oracle", cardano_oracle},
      {"phase-diagram structure", phase_structure},
      {"symmetry suite", symmetry_suite},
      {"perturbation patterns", perturbation_patterns},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
