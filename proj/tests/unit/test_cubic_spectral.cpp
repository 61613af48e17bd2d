#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ptsw/cubic_spectral.hpp"
#include "ptsw/error.hpp"

using namespace ptsw;
using std::numbers::pi;

namespace {

SystemParams standard(double gamma = 0.0, double g = 0.0) {
  return SystemParams::from_omega_theta(1.0, pi / 40, gamma, 1.07, g);
}

std::vector<Complex> as_vec(const std::array<Complex, 3>& a) { return {a.begin(), a.end()}; }

DepressedCubic pq(double p, double q) { return {p, q, 0.0, 1.0}; }

}  // namespace

TEST_CASE("characteristic polynomial coefficients") {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  const auto c = char_poly_coeffs(d);
  CHECK(c.b == doctest::Approx(-6.0));
  CHECK(c.c == doctest::Approx(11.0));
  CHECK(c.d == doctest::Approx(-6.0));
  const auto z = char_poly_coeffs(ComplexMatrix::Zero(3, 3));
  CHECK(z.b == 0.0);
  CHECK(z.c == 0.0);
  CHECK(z.d == 0.0);

  ComplexMatrix bad = ComplexMatrix::Zero(3, 3);
  bad(0, 0) = Complex{0.0, 1.0};
  CHECK_THROWS_AS(char_poly_coeffs(bad), Error);
  CHECK_THROWS_AS(char_poly_coeffs(ComplexMatrix::Zero(2, 2)), Error);

  const auto h = effective_matrix_approx(standard(0.005, 0.1)).matrix;
  const auto hc = char_poly_coeffs(h);
  CHECK(hc.imag_leak < 1e-12);
  const auto dc = depress(hc, 1.0);
  CHECK(multiset_distance(as_vec(cardano_energies(dc)), to_std(eigendecompose(h).values)) < 1e-10);
}

TEST_CASE("depressed form") {
  const auto dc = depress({-6.0, 11.0, -6.0, 0.0}, 1.0);
  CHECK(dc.p == doctest::Approx(-1.0 / 3.0));
  CHECK(std::abs(dc.q) < 1e-14);
  CHECK(dc.shift == doctest::Approx(2.0));
  const auto e = cardano_energies(dc);
  CHECK(multiset_distance(as_vec(e), {1.0, 2.0, 3.0}) < 1e-13);
  const auto z = depress({0.0, 0.0, 0.0, 0.0}, 1.0);
  CHECK(z.p == 0.0);
  CHECK(z.q == 0.0);

  // Scale enters as Omega: the same matrix in units of 2 Omega.
  const auto scaled = depress({-12.0, 44.0, -48.0, 0.0}, 2.0);
  CHECK(scaled.p == doctest::Approx(-1.0 / 3.0));
  CHECK(multiset_distance(as_vec(cardano_energies(scaled)), {2.0, 4.0, 6.0}) < 1e-12);
}

TEST_CASE("cardano examples") {
  CHECK(multiset_distance(as_vec(cardano_roots(pq(0, 0))), {0.0, 0.0, 0.0}) == 0.0);
  CHECK(multiset_distance(as_vec(cardano_roots(pq(-1, 0))), {std::sqrt(3.0), -std::sqrt(3.0), 0.0}) <
        1e-14);
  CHECK(multiset_distance(as_vec(cardano_roots(pq(-1, 1))), {-2.0, 1.0, 1.0}) < 1e-7);
  CHECK(multiset_distance(as_vec(cardano_roots(pq(1, 0))),
                          {0.0, Complex{0.0, std::sqrt(3.0)}, Complex{0.0, -std::sqrt(3.0)}}) < 1e-14);
  CHECK(multiset_distance(as_vec(cardano_roots(pq(0, 4))),
                          {-2.0, 2.0 * std::polar(1.0, pi / 3), 2.0 * std::polar(1.0, -pi / 3)}) <
        1e-14);
  // Fixed order: E1 = alpha + beta.
  const auto r = cardano(pq(0.5, 2.0));
  CHECK(std::abs(r.roots[0] - (r.alpha + r.beta)) < 1e-15);
  CHECK(std::abs(r.roots[0].imag()) < 1e-15);
}

TEST_CASE("cardano on seeded random cubics") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 2000; ++k) {
    const double p = u(rng), q = u(rng);
    const auto r = cardano(pq(p, q));
    CHECK(std::abs(r.alpha * r.beta + p) < 1e-12);
    for (const auto& e : r.roots) CHECK(std::abs(e * e * e + 3.0 * p * e + 2.0 * q) < 1e-11);
    const double disc = p * p * p + q * q;
    int real = 0;
    for (const auto& e : r.roots) real += std::abs(e.imag()) < 1e-10;
    if (disc < -1e-6) CHECK(real == 3);
    if (disc > 1e-6) CHECK(real == 1);
  }
}

TEST_CASE("classification") {
  CHECK(classify(pq(-1, 0)).tag == SpectrumTag::ThreeReal);
  CHECK(classify(pq(1, 0)).tag == SpectrumTag::OneRealConjugatePair);
  CHECK(classify(pq(-1, 1)).tag == SpectrumTag::EP2);
  CHECK(classify(pq(0, 0)).tag == SpectrumTag::EP3);
  CHECK(classify(pq(-1, 1)).discriminant == 0.0);
  CHECK(to_string(SpectrumTag::OneRealConjugatePair) == "OneRealConjugatePair");
}

TEST_CASE("critical scaling closed forms") {
  const auto cs = critical_scaling(0.07, pi / 40, 1.0);
  CHECK(cs.g_cr == doctest::Approx(std::sqrt(0.07) / 2).epsilon(1e-14));
  CHECK(cs.g_cr == doctest::Approx(0.1323).epsilon(1e-3));
  CHECK(cs.gamma_cr == doctest::Approx(0.00735).epsilon(5e-3));
  const double u2 = 4 * (std::pow(std::cos(pi / 40), 2) / 1.07 + std::pow(std::sin(pi / 40), 2) / 2.07);
  CHECK(cs.u2 == doctest::Approx(u2).epsilon(1e-14));
  CHECK(cs.g_tilde_sq == doctest::Approx(0.07 / u2).epsilon(1e-14));
  const auto tiny = critical_scaling(0.07, 1e-9, 1.0);
  CHECK(tiny.gamma_cr < 1e-9);
  CHECK(tiny.g_cr == cs.g_cr);
  CHECK_THROWS_AS(critical_scaling(-0.1, pi / 40, 1.0), Error);
  CHECK_THROWS_AS(critical_scaling(0.07, pi / 2, 1.0), Error);
}

TEST_CASE("EP3 location") {
  const auto rep = find_ep3(standard());
  CHECK(rep.g_cr == doctest::Approx(0.1375).epsilon(0.01));
  CHECK(rep.gamma_cr == doctest::Approx(7.65e-3).epsilon(0.01));
  CHECK(rep.rank_ok);
  CHECK(rep.residual < 1e-12);
  CHECK(rep.iterations <= 10);
  const auto dc = depressed_cubic(standard(rep.gamma_cr, rep.g_cr), EffectiveModel::Approx);
  CHECK(classify(dc).tag == SpectrumTag::EP3);
  // Triple energy equals the shift of the depressed form.
  CHECK(std::abs(rep.triple_energy - dc.shift) < 1e-12);

  // The rank test uses the analytic minor -sqrt2 i g gamma sin 2theta in magnitude.
  CHECK(rep.rank_minor > 1e-4);

  // Halving the detuning shrinks g_cr by about 1/sqrt2.
  auto half = standard();
  half.omega_r = 1.035;
  const auto rep_half = find_ep3(half);
  CHECK(rep_half.g_cr / rep.g_cr == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));

  for (double dw : {0.02, 0.05, 0.1, 0.15}) {
    auto b = standard();
    b.omega_r = 1.0 + dw;
    CHECK(find_ep3(b).iterations <= 10);
  }
}

TEST_CASE("solve_pq hits a requested target") {
  // Target taken from a known point, solved from a displaced guess.
  const auto target = depressed_cubic(standard(0.006, 0.12), EffectiveModel::Approx);
  const auto sol = solve_pq(standard(), target.p, target.q, {0.125, 0.0065});
  CHECK(sol.g == doctest::Approx(0.12).epsilon(1e-6));
  CHECK(sol.gamma == doctest::Approx(0.006).epsilon(1e-6));
  CHECK(sol.residual < 1e-12);
}

TEST_CASE("perturbation cases") {
  SUBCASE("exact examples") {
    const auto c1 = perturbation_case(pq(-1, 1));
    CHECK(c1.case_id == 1);
    CHECK(multiset_distance(as_vec(c1.roots), {-2.0, 1.0, 1.0}) < 1e-15);
    const auto c2 = perturbation_case(pq(-4, 0));
    CHECK(c2.case_id == 2);
    CHECK(multiset_distance(as_vec(c2.roots), {2 * std::sqrt(3.0), -2 * std::sqrt(3.0), 0.0}) < 1e-14);
    const auto c3 = perturbation_case(pq(1, 0));
    CHECK(c3.case_id == 3);
    CHECK(multiset_distance(as_vec(c3.roots), {0.0, Complex{0, std::sqrt(3.0)}, Complex{0, -std::sqrt(3.0)}}) <
          1e-15);
    const auto c4 = perturbation_case(pq(0, 4));
    CHECK(c4.case_id == 4);
    CHECK(c4.bound == 0.0);
    CHECK(multiset_distance(as_vec(c4.roots), as_vec(cardano_roots(pq(0, 4)))) < 1e-14);
  }
  SUBCASE("closed forms match cardano near the origin") {
    for (double r : {1e-2, 1e-4}) {
      const double q1 = r * r * r;
      const auto case1 = pq(-std::cbrt(q1 * q1), q1);
      CHECK(multiset_distance(as_vec(perturbation_case(case1).roots), as_vec(cardano_roots(case1))) <
            1e-9);
      const auto case2 = pq(-r * r, 0.0);
      CHECK(multiset_distance(as_vec(perturbation_case(case2).roots), as_vec(cardano_roots(case2))) <
            1e-12);
      const auto case3 = pq(r * r, 0.0);
      CHECK(multiset_distance(as_vec(perturbation_case(case3).roots), as_vec(cardano_roots(case3))) <
            1e-12);
      const auto case4 = pq(1e-5 * r * r, r * r * r);
      const auto res4 = perturbation_case(case4);
      CHECK(res4.case_id == 4);
      CHECK(multiset_distance(as_vec(res4.roots), as_vec(cardano_roots(case4))) <= res4.bound);
    }
  }
  SUBCASE("ambiguous points") {
    CHECK_THROWS_AS(perturbation_case(pq(0, 0)), Error);
    CHECK_THROWS_AS(perturbation_case(pq(-1, 0.5)), Error);
  }
}

TEST_CASE("phase diagram and EP2 contour") {
  const auto base = standard();
  const auto pd = phase_diagram(base, {0.0, 0.3}, {0.0, 0.02}, 31, 21);
  CHECK(pd.nodes.size() == 31 * 21);
  for (int i = 0; i < pd.n_g; ++i) CHECK(pd.at(i, 0).max_im < 1e-12);
  // Small g, large gamma is broken.
  CHECK(pd.at(1, 20).max_im > 1e-4);
  CHECK(pd.at(1, 20).tag == SpectrumTag::OneRealConjugatePair);
  CHECK(pd.at(5, 0).gamma == 0.0);
  CHECK(pd.at(5, 0).g == doctest::Approx(0.05));

  // Multithreaded evaluation is identical.
  const auto pd4 = phase_diagram(base, {0.0, 0.3}, {0.0, 0.02}, 31, 21, EffectiveModel::Approx, 4);
  for (std::size_t k = 0; k < pd.nodes.size(); ++k) CHECK(pd.nodes[k].max_im == pd4.nodes[k].max_im);

  const auto lines = trace_ep2_line(base, {0.0, 0.3}, {0.0, 0.02}, 61, 41);
  REQUIRE_FALSE(lines.empty());
  double worst = 0.0;
  std::size_t points = 0;
  for (const auto& line : lines) {
    for (const auto& [g, gamma] : line) {
      const auto dc = depressed_cubic(standard(gamma, g), EffectiveModel::Approx);
      worst = std::max(worst, std::abs(dc.p * dc.p * dc.p + dc.q * dc.q));
      ++points;
    }
  }
  CHECK(points > 20);
  CHECK(worst < 1e-8);

  CHECK_THROWS_AS(trace_ep2_line(base, {0.0, 0.3}, {0.0, 0.02}, 8, 41), Error);
  // Far above the EP2 line nothing changes sign.
  CHECK_THROWS_AS(trace_ep2_line(base, {0.0, 0.01}, {0.05, 0.06}, 16, 16), Error);
}

TEST_CASE("contour is continued through the cusp at the EP3") {
  const auto rep = find_ep3(standard());
  const auto lines = trace_ep2_line(standard(), {0.0, 0.3}, {0.0, 0.02}, 121, 121);
  double nearest = 1e300, top = 0.0;
  for (const auto& line : lines) {
    for (const auto& [g, gamma] : line) {
      nearest = std::min(nearest, std::hypot(g - rep.g_cr, (gamma - rep.gamma_cr) * 10.0));
      top = std::max(top, gamma);
      const auto dc = depressed_cubic(standard(gamma, g), EffectiveModel::Approx);
      CHECK(std::abs(dc.p * dc.p * dc.p + dc.q * dc.q) < 1e-8);
    }
  }
  CHECK(nearest < 1e-6);
  // The fold is the highest point of the line in gamma.
  CHECK(top == doctest::Approx(rep.gamma_cr).epsilon(1e-6));
}
