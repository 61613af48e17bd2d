#include "ptsw/qed_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ptsw/error.hpp"

namespace ptsw {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::Matrix2cd qubit_block(double delta, Complex a) {
  Eigen::Matrix2cd h;
  h << a, delta / 2.0, delta / 2.0, -a;
  return h;
}

Eigen::Index basis_index(int n, int q1, int q2) { return 4 * n + 2 * q1 + q2; }

int sigma_z(int q) { return q == 0 ? 1 : -1; }

void check_n_max(int n_max) {
  if (n_max < 1) throw Error(ErrorCode::InvalidParams, "n_max must be >= 1");
}

Eigen::Vector4cd kron2(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  Eigen::Vector4cd out;
  out << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  return out;
}

const Eigen::Vector2cd& right_of(const SingleQubitData& d, Branch b) {
  return b == Branch::Plus ? d.right_plus : d.right_minus;
}

const Eigen::RowVector2cd& left_of(const SingleQubitData& d, Branch b) {
  return b == Branch::Plus ? d.left_plus : d.left_minus;
}

Complex branch_energy(const SingleQubitData& d, Branch b) {
  return b == Branch::Plus ? d.lambda : -d.lambda;
}

void place_state(const SingleQubitData& q1d, const SingleQubitData& q2d, const StateLabel& s,
                 Eigen::Index dim, ComplexVector& right, ComplexRowVector& left) {
  right = ComplexVector::Zero(dim);
  left = ComplexRowVector::Zero(dim);
  const Eigen::Vector4cd r = kron2(right_of(q1d, s.q1), right_of(q2d, s.q2));
  const Eigen::Vector4cd l =
      kron2(left_of(q1d, s.q1).transpose(), left_of(q2d, s.q2).transpose());
  right.segment<4>(4 * s.n) = r;
  left.segment<4>(4 * s.n) = l.transpose();
}

Complex state_energy(const SingleQubitData& q1d, const SingleQubitData& q2d, const StateLabel& s,
                     double omega_r) {
  return branch_energy(q1d, s.q1) + branch_energy(q2d, s.q2) + static_cast<double>(s.n) * omega_r;
}

std::vector<StateLabel> group_labels(int n) {
  std::vector<StateLabel> labels{{Branch::Plus, Branch::Minus, n},
                                 {Branch::Minus, Branch::Plus, n},
                                 {Branch::Minus, Branch::Minus, n + 1}};
  if (n >= 1) labels.push_back({Branch::Plus, Branch::Plus, n - 1});
  return labels;
}

}  // namespace

double SystemParams::omega() const { return std::hypot(delta, epsilon); }

double SystemParams::theta() const {
  const double om = omega();
  return om > 0.0 ? std::acos(std::clamp(epsilon / om, -1.0, 1.0)) : 0.0;
}

double SystemParams::detuning() const { return omega_r - omega(); }

SystemParams SystemParams::from_omega_theta(double omega, double theta, double gamma,
                                            double omega_r, double g, int n_max) {
  SystemParams p;
  p.delta = omega * std::sin(theta);
  p.epsilon = omega * std::cos(theta);
  p.gamma = gamma;
  p.omega_r = omega_r;
  p.g = g;
  p.n_max = n_max;
  return p;
}

void SystemParams::validate() const {
  for (double v : {delta, epsilon, gamma, omega_r, g}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParams, "non-finite parameter");
  }
  if (delta < 0.0) throw Error(ErrorCode::InvalidParams, "delta must be >= 0");
  if (gamma < 0.0) throw Error(ErrorCode::InvalidParams, "gamma must be >= 0");
  if (g < 0.0) throw Error(ErrorCode::InvalidParams, "g must be >= 0");
  if (omega_r <= 0.0) throw Error(ErrorCode::InvalidParams, "omega_r must be > 0");
  if (omega() <= 0.0) throw Error(ErrorCode::InvalidParams, "qubit frequency omega must be > 0");
  check_n_max(n_max);
}

SingleQubitData SingleQubitData::conjugated() const {
  SingleQubitData c;
  c.lambda = std::conj(lambda);
  c.right_plus = right_plus.conjugate();
  c.right_minus = right_minus.conjugate();
  c.left_plus = left_plus.conjugate();
  c.left_minus = left_minus.conjugate();
  c.s = std::conj(s);
  c.t = std::conj(t);
  return c;
}

SingleQubitData single_qubit_data(const SystemParams& params) {
  params.validate();
  const double half_delta = params.delta / 2.0;
  const Complex a{params.epsilon / 2.0, params.gamma};
  Complex lambda = std::sqrt(half_delta * half_delta + a * a);
  if (lambda.real() < 0.0 || (lambda.real() == 0.0 && lambda.imag() < 0.0)) lambda = -lambda;
  if (std::abs(lambda) < 1e-12 * params.omega()) {
    throw Error(ErrorCode::SingleQubitEP, "lambda vanishes: single-qubit exceptional point");
  }

  SingleQubitData d;
  d.lambda = lambda;
  // Both forms are the same pair up to a common factor; pick the one that
  // does not collapse when a + lambda -> 0.
  if (std::abs(a + lambda) >= std::abs(lambda - a)) {
    d.right_plus << a + lambda, half_delta;
    d.right_minus << -half_delta, a + lambda;
  } else {
    d.right_plus << half_delta, lambda - a;
    d.right_minus << a - lambda, half_delta;
  }
  // The qubit block is complex symmetric, so lefts are transposed rights.
  d.left_plus = d.right_plus.transpose() / (d.right_plus.transpose() * d.right_plus)(0, 0);
  d.left_minus = d.right_minus.transpose() / (d.right_minus.transpose() * d.right_minus)(0, 0);
  d.s = a / lambda;
  d.t = params.delta / (2.0 * lambda);
  return d;
}

ComplexMatrix build_unperturbed_hamiltonian(const SystemParams& params) {
  params.validate();
  const Complex a{params.epsilon / 2.0, params.gamma};
  const Eigen::Matrix2cd h1 = qubit_block(params.delta, a);
  const Eigen::Matrix2cd h2 = qubit_block(params.delta, std::conj(a));
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix4cd hq = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      hq.block<2, 2>(2 * i, 2 * j) = h1(i, j) * id + (i == j ? h2 : Eigen::Matrix2cd::Zero());
    }
  }
  const int levels = params.n_max + 1;
  ComplexMatrix h = ComplexMatrix::Zero(4 * levels, 4 * levels);
  for (int n = 0; n < levels; ++n) {
    h.block<4, 4>(4 * n, 4 * n) = hq + Eigen::Matrix4cd::Identity() * (n * params.omega_r);
  }
  return h;
}

ComplexMatrix build_interaction(int n_max) {
  check_n_max(n_max);
  const int levels = n_max + 1;
  ComplexMatrix v = ComplexMatrix::Zero(4 * levels, 4 * levels);
  for (int n = 0; n + 1 < levels; ++n) {
    const double amp = std::sqrt(static_cast<double>(n + 1));
    for (int q1 = 0; q1 < 2; ++q1) {
      for (int q2 = 0; q2 < 2; ++q2) {
        const double sz = sigma_z(q1) + sigma_z(q2);
        const auto lo = basis_index(n, q1, q2);
        const auto hi = basis_index(n + 1, q1, q2);
        v(lo, hi) = amp * sz;
        v(hi, lo) = amp * sz;
      }
    }
  }
  return v;
}

ComplexMatrix build_full_hamiltonian(const SystemParams& params) {
  return build_unperturbed_hamiltonian(params) + params.g * build_interaction(params.n_max);
}

ComplexMatrix parity_operator(int n_max) {
  check_n_max(n_max);
  const int levels = n_max + 1;
  ComplexMatrix p = ComplexMatrix::Zero(4 * levels, 4 * levels);
  for (int n = 0; n < levels; ++n) {
    for (int q1 = 0; q1 < 2; ++q1) {
      for (int q2 = 0; q2 < 2; ++q2) p(basis_index(n, q2, q1), basis_index(n, q1, q2)) = 1.0;
    }
  }
  return p;
}

std::string StateLabel::str() const {
  std::string out;
  out += q1 == Branch::Plus ? '+' : '-';
  out += q2 == Branch::Plus ? '+' : '-';
  out += "~;" + std::to_string(n);
  return out;
}

std::size_t LabeledEigensystem::index_of(const StateLabel& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw Error(ErrorCode::IndexOutOfRange, "state " + label.str() + " not in the truncated space");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

LabeledEigensystem unperturbed_eigensystem(const SystemParams& params) {
  const SingleQubitData q1d = single_qubit_data(params);
  const SingleQubitData q2d = q1d.conjugated();
  const int levels = params.n_max + 1;
  const Eigen::Index dim = 4 * levels;

  std::vector<StateLabel> generated;
  for (int n = 0; n < levels; ++n) {
    for (Branch b1 : {Branch::Plus, Branch::Minus}) {
      for (Branch b2 : {Branch::Plus, Branch::Minus}) generated.push_back({b1, b2, n});
    }
  }
  std::vector<Complex> energies;
  for (const auto& s : generated) energies.push_back(state_energy(q1d, q2d, s, params.omega_r));

  std::vector<std::size_t> order(generated.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return eigenvalue_less(energies[i], energies[j]);
  });

  LabeledEigensystem out;
  out.eig.values.resize(dim);
  out.eig.rights.resize(dim, dim);
  out.eig.lefts.resize(dim, dim);
  ComplexVector r;
  ComplexRowVector l;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const std::size_t src = order[static_cast<std::size_t>(k)];
    place_state(q1d, q2d, generated[src], dim, r, l);
    // Rights carry unit norm like every other eigensystem in the library.
    const double norm = r.norm();
    out.eig.values(k) = energies[src];
    out.eig.rights.col(k) = r / norm;
    out.eig.lefts.row(k) = l * norm;
    out.labels.push_back(generated[src]);
  }
  out.eig.residual_norm = max_residual(build_unperturbed_hamiltonian(params), out.eig);
  return out;
}

GroupBasis resonant_group_basis(const SystemParams& params, int n) {
  if (n < 0) throw Error(ErrorCode::IndexOutOfRange, "boson number must be >= 0");
  if (n + 1 > params.n_max) {
    throw Error(ErrorCode::IndexOutOfRange, "group n+1 exceeds the boson cutoff");
  }
  const SingleQubitData q1d = single_qubit_data(params);
  const SingleQubitData q2d = q1d.conjugated();
  const Eigen::Index dim = 4 * (params.n_max + 1);

  GroupBasis out;
  out.labels = group_labels(n);
  const auto k = static_cast<Eigen::Index>(out.labels.size());
  out.rights.resize(dim, k);
  out.lefts.resize(k, dim);
  out.energies.resize(k);
  ComplexVector r;
  ComplexRowVector l;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& s = out.labels[static_cast<std::size_t>(i)];
    place_state(q1d, q2d, s, dim, r, l);
    out.rights.col(i) = r;
    out.lefts.row(i) = l;
    out.energies(i) = state_energy(q1d, q2d, s, params.omega_r);
  }
  return out;
}

QuasiDegenerateGroup resonant_group(const LabeledEigensystem& sys, int n) {
  std::vector<std::size_t> idx;
  for (const auto& s : group_labels(n)) idx.push_back(sys.index_of(s));
  return QuasiDegenerateGroup::from_p(std::move(idx), sys.labels.size());
}

EffectiveHamiltonian effective_matrix_full(const SystemParams& params) {
  const SingleQubitData d = single_qubit_data(params);
  const double w = params.omega_r;
  const double g2 = params.g * params.g;
  const Complex lam = d.lambda;
  const Complex s = d.s;
  const Complex t = d.t;
  const Complex den = w + 2.0 * lam;
  if (std::abs(den) < 1e-12 * std::max(1.0, w)) {
    throw Error(ErrorCode::InvalidParams, "omega_r + 2 lambda vanishes");
  }
  const double im_s2 = s.imag() * s.imag();
  const double re_s2 = s.real() * s.real();

  ComplexMatrix h(3, 3);
  h(0, 0) = 2.0 * kI * lam.imag() - g2 * (std::conj(t) * std::conj(t) / std::conj(den) - 4.0 * im_s2 / w);
  h(1, 1) = -2.0 * kI * lam.imag() - g2 * (t * t / den - 4.0 * im_s2 / w);
  h(2, 2) = w - 2.0 * lam.real() - 4.0 * g2 * (re_s2 / w + (t * t / den).real());
  h(0, 1) = h(1, 0) = -g2 * std::norm(t) * (1.0 / den).real();
  h(0, 2) = h(2, 0) = -params.g * t;
  h(1, 2) = h(2, 1) = -params.g * std::conj(t);

  std::vector<std::string> labels;
  for (const auto& s_label : group_labels(0)) labels.push_back(s_label.str());
  return {std::move(h), std::move(labels), params.g, 2};
}

EffectiveHamiltonian effective_matrix_numeric(const SystemParams& params, int n) {
  const LabeledEigensystem sys = unperturbed_eigensystem(params);
  const QuasiDegenerateGroup group = resonant_group(sys, n);
  std::vector<std::string> labels;
  for (const auto& s : group_labels(n)) labels.push_back(s.str());
  return effective_hamiltonian(sys.eig, build_interaction(params.n_max), params.g, group,
                               std::move(labels));
}

EffectiveHamiltonian effective_matrix_approx(const SystemParams& params) {
  params.validate();
  const double om = params.omega();
  const double th = params.theta();
  const double w = params.omega_r;
  const double g = params.g;
  const double sin2 = std::sin(th) * std::sin(th);
  const double cos2 = std::cos(th) * std::cos(th);

  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(0, 0) = -2.0 * g * g * sin2 / (w + om);
  h(2, 2) = params.detuning() - 4.0 * g * g * (cos2 / w + sin2 / (w + om));
  h(0, 1) = h(1, 0) = 2.0 * kI * params.gamma * std::cos(th);
  h(0, 2) = h(2, 0) = -std::sqrt(2.0) * g * std::sin(th);
  return {std::move(h), {"bright", "dark", "photon"}, g, 2};
}

ComplexMatrix parity_basis_matrix() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix f(3, 3);
  f << r, r, 0.0, r, -r, 0.0, 0.0, 0.0, 1.0;
  return f;
}

ComplexMatrix parity_transform(const ComplexMatrix& h) {
  if (h.rows() != 3 || h.cols() != 3) {
    throw Error(ErrorCode::DimensionMismatch, "parity_transform expects a 3x3 matrix");
  }
  const ComplexMatrix f = parity_basis_matrix();
  return f * h * f;
}

ComplexMatrix group_parity_matrix() {
  ComplexMatrix p = ComplexMatrix::Zero(3, 3);
  p(0, 1) = p(1, 0) = p(2, 2) = 1.0;
  return p;
}

ComplexMatrix group_parity_matrix_diagonal() {
  ComplexMatrix p = ComplexMatrix::Zero(3, 3);
  p(0, 0) = p(2, 2) = 1.0;
  p(1, 1) = -1.0;
  return p;
}

SigmaAction two_spin_sigma_action(const SingleQubitData& data, const std::string& label) {
  std::string core = label;
  if (!core.empty() && core.back() == '~') core.pop_back();
  if (core.size() != 2 || (core[0] != '+' && core[0] != '-') || (core[1] != '+' && core[1] != '-')) {
    throw Error(ErrorCode::InvalidLabel, "unknown two-spin label '" + label + "'");
  }
  // sz|+> = s|+> - t|->, sz|-> = -t|+> - s|->; qubit 2 uses conjugates.
  const Complex s1 = core[0] == '+' ? data.s : -data.s;
  const Complex s2 = core[1] == '+' ? std::conj(data.s) : -std::conj(data.s);
  return {s1 + s2, -data.t, -std::conj(data.t)};
}

}  // namespace ptsw
