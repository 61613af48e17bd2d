#include "ptsw/cubic_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "ptsw/error.hpp"

namespace ptsw {

namespace {

constexpr double kLeakThreshold = 1e-8;
constexpr double kRankThreshold = 1e-12;
constexpr int kNewtonBudget = 50;
constexpr double kFdStep = 1e-7;

const Complex kOmega3 = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);  // e^{2 pi i / 3}

// Cube root that stays on the real axis for real input.
Complex cube_root(Complex z) {
  if (z.imag() == 0.0) return {std::cbrt(z.real()), 0.0};
  return std::pow(z, 1.0 / 3.0);
}

SystemParams at(const SystemParams& base, double g_ratio, double gamma_ratio) {
  SystemParams p = base;
  p.g = g_ratio * base.omega();
  p.gamma = gamma_ratio * base.omega();
  return p;
}

double discriminant(const DepressedCubic& dc) { return dc.p * dc.p * dc.p + dc.q * dc.q; }

double axis_value(const AxisRange& r, int i, int n) {
  return r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void check_grid(const AxisRange& g, const AxisRange& gamma, int n_g, int n_gamma) {
  if (n_g < 16 || n_gamma < 16) throw Error(ErrorCode::InvalidParams, "grid needs >= 16 nodes per axis");
  if (!(g.hi > g.lo) || !(gamma.hi > gamma.lo) || g.lo < 0.0 || gamma.lo < 0.0) {
    throw Error(ErrorCode::InvalidParams, "ranges must be non-negative and non-degenerate");
  }
}

double max_minor(const ComplexMatrix& m) {
  double best = 0.0;
  for (int r0 = 0; r0 < 3; ++r0) {
    for (int r1 = r0 + 1; r1 < 3; ++r1) {
      for (int c0 = 0; c0 < 3; ++c0) {
        for (int c1 = c0 + 1; c1 < 3; ++c1) {
          const Complex minor = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
          best = std::max(best, std::abs(minor));
        }
      }
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(SpectrumTag tag) noexcept {
  switch (tag) {
    case SpectrumTag::ThreeReal: return "ThreeReal";
    case SpectrumTag::OneRealConjugatePair: return "OneRealConjugatePair";
    case SpectrumTag::EP2: return "EP2";
    case SpectrumTag::EP3: return "EP3";
  }
  return "?";
}

CubicCoeffs char_poly_coeffs(const ComplexMatrix& h) {
  if (h.rows() != 3 || h.cols() != 3) {
    throw Error(ErrorCode::DimensionMismatch, "characteristic cubic needs a 3x3 matrix");
  }
  const Complex tr = h.trace();
  const Complex tr2 = (h * h).trace();
  const Complex b = -tr;
  const Complex c = (tr * tr - tr2) / 2.0;
  const Complex d = -h.determinant();
  CubicCoeffs out{b.real(), c.real(), d.real(),
                  std::max({std::abs(b.imag()), std::abs(c.imag()), std::abs(d.imag())})};
  if (out.imag_leak >= kLeakThreshold) {
    throw Error(ErrorCode::NotPTSymmetric,
                "characteristic polynomial has complex coefficients (leak " +
                    std::to_string(out.imag_leak) + ")");
  }
  return out;
}

DepressedCubic depress(const CubicCoeffs& k, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidParams, "depress needs omega > 0");
  DepressedCubic dc;
  dc.p = (k.c - k.b * k.b / 3.0) / (3.0 * omega * omega);
  dc.q = (2.0 * k.b * k.b * k.b - 9.0 * k.b * k.c + 27.0 * k.d) / (54.0 * omega * omega * omega);
  dc.shift = -k.b / 3.0;
  dc.scale = omega;
  return dc;
}

CardanoResult cardano(const DepressedCubic& dc) {
  const double p = dc.p;
  const double q = dc.q;
  CardanoResult out{};
  if (p == 0.0 && q == 0.0) {
    out.roots = {Complex{}, Complex{}, Complex{}};
    return out;
  }
  const double disc = p * p * p + q * q;
  const Complex root_disc = disc >= 0.0 ? Complex{std::sqrt(disc), 0.0} : Complex{0.0, std::sqrt(-disc)};
  const Complex plus = -q + root_disc;
  const Complex minus = -q - root_disc;
  if (std::abs(plus) >= std::abs(minus)) {
    out.alpha = cube_root(plus);
    out.beta = -p / out.alpha;
  } else {
    out.beta = cube_root(minus);
    out.alpha = -p / out.beta;
  }
  const Complex w = kOmega3;
  const Complex w2 = std::conj(kOmega3);
  out.roots = {out.alpha + out.beta, w * out.alpha + w2 * out.beta, w2 * out.alpha + w * out.beta};
  return out;
}

std::array<Complex, 3> cardano_roots(const DepressedCubic& dc) { return cardano(dc).roots; }

std::array<Complex, 3> cardano_energies(const DepressedCubic& dc) {
  auto roots = cardano_roots(dc);
  for (auto& r : roots) r = dc.scale * r + dc.shift;
  return roots;
}

SpectrumClass classify(const DepressedCubic& dc, double tol) {
  const double disc = discriminant(dc);
  SpectrumClass out{SpectrumTag::ThreeReal, disc};
  if (std::max(std::pow(std::abs(dc.p), 1.5), std::abs(dc.q)) < tol) {
    out.tag = SpectrumTag::EP3;
  } else if (std::abs(disc) < tol * tol) {
    out.tag = SpectrumTag::EP2;
  } else if (disc > 0.0) {
    out.tag = SpectrumTag::OneRealConjugatePair;
  }
  return out;
}

ComplexMatrix effective_matrix(const SystemParams& params, EffectiveModel model) {
  return model == EffectiveModel::Full ? effective_matrix_full(params).matrix
                                       : effective_matrix_approx(params).matrix;
}

DepressedCubic depressed_cubic(const SystemParams& params, EffectiveModel model) {
  return depress(char_poly_coeffs(effective_matrix(params, model)), params.omega());
}

CriticalScaling critical_scaling(double delta_omega, double theta, double omega) {
  if (!(delta_omega > 0.0) || !(omega > 0.0) || !(theta > 0.0 && theta < std::numbers::pi / 2)) {
    throw Error(ErrorCode::InvalidParams,
                "critical scaling needs delta_omega > 0, omega > 0, 0 < theta < pi/2");
  }
  const double dw = delta_omega / omega;
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  CriticalScaling out;
  out.u2 = 4.0 * (c2 / (1.0 + dw) + s2 / (2.0 + dw));
  out.g_tilde_sq = dw / out.u2;
  out.g_cr = std::sqrt(delta_omega * omega) / 2.0;
  out.gamma_cr = out.g_cr * theta / std::numbers::sqrt2;
  return out;
}

PQSolution solve_pq(const SystemParams& base, double target_p, double target_q,
                    std::pair<double, double> guess, EffectiveModel model, double tol) {
  auto residual = [&](double x, double y) {
    const DepressedCubic dc = depressed_cubic(at(base, x, y), model);
    return Eigen::Vector2d(dc.p - target_p, dc.q - target_q);
  };
  Eigen::Vector2d x(guess.first, guess.second);
  if (x(0) < 0.0 || x(1) < 0.0) throw Error(ErrorCode::InvalidParams, "guess must be non-negative");
  Eigen::Vector2d f = residual(x(0), x(1));

  for (int iter = 0; iter <= kNewtonBudget; ++iter) {
    const double res = f.cwiseAbs().sum();
    if (res < tol) return {x(0) * base.omega(), x(1) * base.omega(), res, iter};
    if (iter == kNewtonBudget) break;

    Eigen::Matrix2d jac;
    for (int k = 0; k < 2; ++k) {
      const double h = kFdStep * std::max(std::abs(x(k)), 1e-6);
      Eigen::Vector2d hi = x;
      Eigen::Vector2d lo = x;
      hi(k) += h;
      lo(k) -= h;
      if (lo(k) < 0.0) {
        jac.col(k) = (residual(hi(0), hi(1)) - f) / h;
      } else {
        jac.col(k) = (residual(hi(0), hi(1)) - residual(lo(0), lo(1))) / (2.0 * h);
      }
    }
    Eigen::Vector2d step = jac.fullPivLu().solve(-f);
    if (!step.allFinite()) break;
    // Stay in the physical quadrant and do not let the residual blow up.
    bool accepted = false;
    Eigen::Vector2d trial;
    Eigen::Vector2d f_trial;
    double scale = 1.0;
    for (int halvings = 0; halvings < 40 && !accepted; ++halvings, scale *= 0.5) {
      trial = x + scale * step;
      if (trial.minCoeff() < 0.0) continue;
      f_trial = residual(trial(0), trial(1));
      accepted = f_trial.cwiseAbs().sum() < 2.0 * res;
    }
    if (!accepted) break;
    x = trial;
    f = f_trial;
  }
  throw Error(ErrorCode::NoConvergence,
              "Newton iteration on (p, q) did not converge in " + std::to_string(kNewtonBudget) +
                  " steps");
}

EP3Report find_ep3(const SystemParams& base, std::optional<std::pair<double, double>> guess,
                   EffectiveModel model) {
  base.validate();
  const double om = base.omega();
  const double th = base.theta();
  if (!(base.detuning() > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "EP3 search needs omega_r > omega");
  }
  if (!guess) {
    const CriticalScaling cs = critical_scaling(base.detuning(), th, om);
    guess = std::make_pair(cs.g_cr / om, cs.gamma_cr / om);
  }
  const PQSolution sol = solve_pq(base, 0.0, 0.0, *guess, model);

  SystemParams at_ep = base;
  at_ep.g = sol.g;
  at_ep.gamma = sol.gamma;
  const ComplexMatrix h = effective_matrix(at_ep, model);
  const DepressedCubic dc = depress(char_poly_coeffs(h), om);

  EP3Report rep;
  rep.g_cr = sol.g;
  rep.gamma_cr = sol.gamma;
  rep.triple_energy = Complex{dc.shift, 0.0};
  rep.residual = sol.residual;
  rep.iterations = sol.iterations;
  rep.rank_minor = max_minor(h - rep.triple_energy * ComplexMatrix::Identity(3, 3));
  rep.rank_ok = rep.rank_minor > kRankThreshold;
  if (!rep.rank_ok) {
    throw Error(ErrorCode::RankDeficient,
                "all second-order minors vanish: triple degeneracy is not an EP3");
  }
  return rep;
}

PerturbationResult perturbation_case(const DepressedCubic& dc, double tol) {
  const double p = dc.p;
  const double q = dc.q;
  const double ap3 = std::abs(p) * std::abs(p) * std::abs(p);
  const double q2 = q * q;
  const double pi = std::numbers::pi;
  PerturbationResult out;
  if (p == 0.0 && q == 0.0) {
    throw Error(ErrorCode::AmbiguousCase, "p = q = 0 is the EP3 itself, no perturbation direction");
  }
  if (p < 0.0 && q != 0.0 && std::abs(discriminant(dc)) <= tol * q2) {
    const double r = std::cbrt(q);
    out.case_id = 1;
    out.roots = {Complex{-2.0 * r, 0.0}, Complex{r, 0.0}, Complex{r, 0.0}};
  } else if (p < 0.0 && q2 <= tol * ap3) {
    const double r = std::sqrt(-p);
    out.case_id = 2;
    for (int k = 0; k < 3; ++k) out.roots[static_cast<std::size_t>(k)] = 2.0 * std::cos(pi / 6.0 + 2.0 * pi * k / 3.0) * r;
  } else if (p > 0.0 && q2 <= tol * ap3) {
    const double r = std::sqrt(3.0 * p);
    out.case_id = 3;
    out.roots = {Complex{0.0, 0.0}, Complex{0.0, r}, Complex{0.0, -r}};
  } else if (ap3 <= tol * q2) {
    const double r = std::cbrt(2.0 * q);
    out.case_id = 4;
    out.roots = {Complex{-r, 0.0}, -kOmega3 * r, -std::conj(kOmega3) * r};
    out.bound = 2.0 * std::abs(p) / std::abs(r);
  } else {
    throw Error(ErrorCode::AmbiguousCase, "(p, q) is not on any of the four perturbation directions");
  }
  return out;
}

std::vector<Polyline> trace_ep2_line(const SystemParams& base, AxisRange g_range,
                                     AxisRange gamma_range, int n_g, int n_gamma,
                                     EffectiveModel model, unsigned jobs) {
  check_grid(g_range, gamma_range, n_g, n_gamma);
  const double om = base.omega();
  auto f = [&](double x, double y) { return discriminant(depressed_cubic(at(base, x, y), model)); };

  const auto ng = static_cast<std::size_t>(n_g);
  const auto nm = static_cast<std::size_t>(n_gamma);
  std::vector<double> value(ng * nm);
  parallel_for(value.size(), jobs, [&](std::size_t k) {
    const int i = static_cast<int>(k % ng);
    const int j = static_cast<int>(k / ng);
    value[k] = f(axis_value(g_range, i, n_g), axis_value(gamma_range, j, n_gamma));
  });
  auto positive = [&](int i, int j) { return value[static_cast<std::size_t>(j) * ng + static_cast<std::size_t>(i)] >= 0.0; };

  // Edge ids: horizontal (i,j)-(i+1,j) first, then vertical (i,j)-(i,j+1).
  const std::size_t n_horizontal = nm * (ng - 1);
  auto h_edge = [&](int i, int j) { return static_cast<std::size_t>(j) * (ng - 1) + static_cast<std::size_t>(i); };
  auto v_edge = [&](int i, int j) { return n_horizontal + static_cast<std::size_t>(j) * ng + static_cast<std::size_t>(i); };

  // Crossing point on an edge, refined by bisection on the sign of f.
  auto crossing = [&](std::size_t edge) {
    int i0, j0, i1, j1;
    if (edge < n_horizontal) {
      j0 = j1 = static_cast<int>(edge / (ng - 1));
      i0 = static_cast<int>(edge % (ng - 1));
      i1 = i0 + 1;
    } else {
      const std::size_t e = edge - n_horizontal;
      i0 = i1 = static_cast<int>(e % ng);
      j0 = static_cast<int>(e / ng);
      j1 = j0 + 1;
    }
    const double x0 = axis_value(g_range, i0, n_g), y0 = axis_value(gamma_range, j0, n_gamma);
    const double x1 = axis_value(g_range, i1, n_g), y1 = axis_value(gamma_range, j1, n_gamma);
    const bool s0 = positive(i0, j0);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((f(x0 + mid * (x1 - x0), y0 + mid * (y1 - y0)) >= 0.0) == s0 ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    return std::make_pair(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
  };

  std::map<std::size_t, std::vector<std::size_t>> links;
  auto link = [&](std::size_t a, std::size_t b) {
    links[a].push_back(b);
    links[b].push_back(a);
  };
  for (int j = 0; j + 1 < n_gamma; ++j) {
    for (int i = 0; i + 1 < n_g; ++i) {
      const bool c0 = positive(i, j), c1 = positive(i + 1, j);
      const bool c2 = positive(i + 1, j + 1), c3 = positive(i, j + 1);
      const std::size_t e0 = h_edge(i, j), e1 = v_edge(i + 1, j);
      const std::size_t e2 = h_edge(i, j + 1), e3 = v_edge(i, j);
      std::vector<std::size_t> cut;
      if (c0 != c1) cut.push_back(e0);
      if (c1 != c2) cut.push_back(e1);
      if (c2 != c3) cut.push_back(e2);
      if (c3 != c0) cut.push_back(e3);
      if (cut.size() == 2) {
        link(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        const double xc = 0.5 * (axis_value(g_range, i, n_g) + axis_value(g_range, i + 1, n_g));
        const double yc = 0.5 * (axis_value(gamma_range, j, n_gamma) + axis_value(gamma_range, j + 1, n_gamma));
        if ((f(xc, yc) >= 0.0) == c0) {
          link(e0, e1);
          link(e2, e3);
        } else {
          link(e3, e0);
          link(e1, e2);
        }
      }
    }
  }
  if (links.empty()) throw Error(ErrorCode::EmptyContour, "p^3 + q^2 does not change sign on the grid");

  std::map<std::size_t, std::pair<double, double>> point;
  for (const auto& [edge, nbrs] : links) point[edge] = crossing(edge);

  std::map<std::size_t, bool> used;
  std::vector<Polyline> out;
  auto walk = [&](std::size_t start) {
    Polyline line{point[start]};
    used[start] = true;
    std::size_t cur = start;
    while (true) {
      const auto& nbrs = links[cur];
      const auto it = std::find_if(nbrs.begin(), nbrs.end(), [&](std::size_t n) { return !used[n]; });
      if (it == nbrs.end()) {
        // Back at the start of a closed loop.
        if (line.size() > 2 && std::find(nbrs.begin(), nbrs.end(), start) != nbrs.end()) {
          line.push_back(point[start]);
        }
        break;
      }
      cur = *it;
      used[cur] = true;
      line.push_back(point[cur]);
    }
    out.push_back(std::move(line));
  };
  // Open chains first (they start at the grid boundary), then closed loops.
  for (const auto& [edge, nbrs] : links) {
    if (nbrs.size() == 1 && !used[edge]) walk(edge);
  }
  for (const auto& [edge, nbrs] : links) {
    if (!used[edge]) walk(edge);
  }

  // Near an EP3 the zero set is the cusp (p, q) = (-s^2, s^3), and the
  // region between its branches gets thinner than a cell well before the
  // tip. The grid then joins the branches early, which shows up as a jump
  // of q across zero between neighbouring vertices (q vanishes on the zero
  // set only at p = 0). Such gaps are filled by continuation in s through 0.
  auto inside = [&](const std::pair<double, double>& v) {
    return v.first >= g_range.lo && v.first <= g_range.hi && v.second >= gamma_range.lo &&
           v.second <= gamma_range.hi;
  };
  auto cusp_path = [&](const std::pair<double, double>& a, const std::pair<double, double>& b) {
    Polyline path;
    const DepressedCubic da = depressed_cubic(at(base, a.first, a.second), model);
    const DepressedCubic db = depressed_cubic(at(base, b.first, b.second), model);
    if (!(da.p < 0.0 && db.p < 0.0) || (da.q > 0.0) == (db.q > 0.0)) return path;
    const double sa = std::copysign(std::sqrt(-da.p), da.q);
    const double sb = std::copysign(std::sqrt(-db.p), db.q);
    constexpr int kSteps = 8;
    std::pair<double, double> guess = a;
    try {
      for (int k = 1; k < 2 * kSteps; ++k) {
        const double sk = k <= kSteps ? sa * (1.0 - double(k) / kSteps) : sb * double(k - kSteps) / kSteps;
        const PQSolution sol = solve_pq(base, -sk * sk, sk * sk * sk, guess, model, 1e-15);
        guess = {sol.g / om, sol.gamma / om};
        if (inside(guess)) path.push_back(guess);
      }
    } catch (const Error&) {
      path.clear();  // leave the grid polyline as it is
    }
    return path;
  };
  for (auto& line : out) {
    Polyline refined;
    for (std::size_t i = 0; i < line.size(); ++i) {
      refined.push_back(line[i]);
      if (i + 1 < line.size()) {
        const Polyline fill = cusp_path(line[i], line[i + 1]);
        refined.insert(refined.end(), fill.begin(), fill.end());
      }
    }
    line = std::move(refined);
  }
  return out;
}

PhaseDiagram phase_diagram(const SystemParams& base, AxisRange g_range, AxisRange gamma_range,
                           int n_g, int n_gamma, EffectiveModel model, unsigned jobs) {
  check_grid(g_range, gamma_range, n_g, n_gamma);
  PhaseDiagram pd;
  pd.n_g = n_g;
  pd.n_gamma = n_gamma;
  pd.nodes.resize(static_cast<std::size_t>(n_g) * static_cast<std::size_t>(n_gamma));
  const double om = base.omega();
  parallel_for(pd.nodes.size(), jobs, [&](std::size_t k) {
    PhaseNode& node = pd.nodes[k];
    node.g = axis_value(g_range, static_cast<int>(k % static_cast<std::size_t>(n_g)), n_g);
    node.gamma = axis_value(gamma_range, static_cast<int>(k / static_cast<std::size_t>(n_g)), n_gamma);
    const DepressedCubic dc = depressed_cubic(at(base, node.g, node.gamma), model);
    auto e = cardano_energies(dc);
    // A discriminant at the rounding level of its own terms is a real double
    // root; Cardano would otherwise report its square root as Im E.
    const double terms = std::abs(dc.p * dc.p * dc.p) + dc.q * dc.q;
    if (discriminant(dc) <= 64.0 * std::numeric_limits<double>::epsilon() * terms) {
      for (auto& x : e) x = x.real();
    }
    node.max_im = std::max({e[0].imag(), e[1].imag(), e[2].imag()}) / om;
    node.min_dist = std::min({std::abs(e[0] - e[1]), std::abs(e[0] - e[2]), std::abs(e[1] - e[2])}) / om;
    node.tag = classify(dc).tag;
  });
  return pd;
}

}  // namespace ptsw
