#include "scanner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptsw/cubic_spectral.hpp"
#include "ptsw/ed_solver.hpp"
#include "ptsw/error.hpp"
#include "ptsw/params_io.hpp"
#include "ptsw/qed_model.hpp"

namespace ptsw::cli {

namespace {

using nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::optional<double> delta, epsilon, theta_frac, theta_rad;
  std::optional<double> gamma, gamma_ratio, g, g_ratio, omega_r, omega_r_ratio;
  std::optional<int> n_max;
  std::string config;
  std::string output;
  std::string format;
  unsigned jobs = 1;

  // sweep / compare
  std::string sweep_param = "g";
  double from = 0.0;
  double to = 0.4;
  int points = 401;
  int levels = 9;
  std::string ep2_output;
  double g_max = 0.4;
  int compare_points = 41;

  // phase diagram
  std::string g_range = "0:0.3";
  std::string gamma_range = "0:0.02";
  std::string grid = "121x121";
  std::string contour_output;
  std::string model = "approx";
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

AxisRange parse_range(const std::string& text, const char* what) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    AxisRange r{std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    if (!(r.hi > r.lo)) throw std::invalid_argument(text);
    return r;
  } catch (const std::exception&) {
    throw UsageError(std::string("--") + what + " expects lo:hi with lo < hi, got '" + text + "'");
  }
}

std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    const int a = std::stoi(text.substr(0, x));
    const int b = std::stoi(text.substr(x + 1));
    if (a < 2 || b < 2) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::exception&) {
    throw UsageError("--grid expects NxM with N, M >= 2, got '" + text + "'");
  }
}

EffectiveModel parse_model(const std::string& m) {
  if (m == "approx") return EffectiveModel::Approx;
  if (m == "full") return EffectiveModel::Full;
  throw UsageError("--model must be approx or full");
}

// Defaults: Omega = 1, theta = pi/40, omega_r = 1.07 Omega.
SystemParams resolve(const Flags& f) {
  const SystemParams defaults = SystemParams::from_omega_theta(1.0, std::numbers::pi / 40.0, 0.0, 1.07, 0.0, 7);
  ParamsInput file;
  if (!f.config.empty()) file = load_params_file(f.config);

  if ((f.delta || f.epsilon) && (f.theta_frac || f.theta_rad)) {
    throw UsageError("give either --delta/--epsilon or --theta-frac/--theta-rad, not both");
  }
  ParamsInput flags;
  flags.delta = f.delta;
  flags.epsilon = f.epsilon;
  if (f.theta_frac) {
    if (*f.theta_frac == 0.0) throw UsageError("--theta-frac must be non-zero");
    flags.theta = std::numbers::pi / *f.theta_frac;
  }
  if (f.theta_rad) flags.theta = f.theta_rad;
  if (flags.theta && !file.omega) flags.omega = 1.0;
  flags.gamma = f.gamma;
  flags.g = f.g;
  flags.omega_r = f.omega_r;
  flags.n_max = f.n_max;

  SystemParams p = resolve_params(merge_params(file, flags), defaults);
  const double om = p.omega();
  if (f.gamma_ratio) p.gamma = *f.gamma_ratio * om;
  if (f.g_ratio) p.g = *f.g_ratio * om;
  if (f.omega_r_ratio) p.omega_r = *f.omega_r_ratio * om;
  p.validate();
  return p;
}

ordered_json params_json(const SystemParams& p) {
  ordered_json j;
  j["delta"] = p.delta;
  j["epsilon"] = p.epsilon;
  j["gamma"] = p.gamma;
  j["omega_r"] = p.omega_r;
  j["g"] = p.g;
  j["n_max"] = p.n_max;
  j["omega"] = p.omega();
  j["theta"] = p.theta();
  return j;
}

// Destination for the artifact plus the summary stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out, std::ostream& err) : out_(&out), summary_(&out) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("cannot write output file " + path);
      out_ = file_.get();
    } else {
      summary_ = &err;
    }
  }
  std::ostream& artifact() { return *out_; }
  std::ostream& summary() { return *summary_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
  std::ostream* summary_;
};

std::unique_ptr<std::ofstream> open_side_file(const std::string& path) {
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*f) throw UsageError("cannot write output file " + path);
  return f;
}

std::string header(const std::string& command, const SystemParams& p, const std::string& extra = {}) {
  std::string h = "# ptsw " + command + " " + describe(p);
  if (!extra.empty()) h += " " + extra;
  return h + "\n";
}

void check_format(const std::string& fmt) {
  if (fmt != "csv" && fmt != "json") throw UsageError("--format must be csv or json");
}

void cmd_spectrum(const Flags& f, const SystemParams& p, Sink& sink) {
  const std::string fmt = f.format.empty() ? "csv" : f.format;
  check_format(fmt);
  const auto eig = full_spectrum(p);
  const auto par = krein_parities(eig, parity_operator(p.n_max), p.omega());
  const double om = p.omega();
  if (fmt == "csv") {
    auto& os = sink.artifact();
    os << header("spectrum", p) << "sweep_value,level_index,re_e,im_e,parity_index\n";
    for (Eigen::Index i = 0; i < eig.dim(); ++i) {
      os << num(p.g / om) << ',' << i << ',' << num(eig.values(i).real() / om) << ','
         << num(eig.values(i).imag() / om) << ',' << par[static_cast<std::size_t>(i)] << '\n';
    }
  } else {
    ordered_json j;
    j["command"] = "spectrum";
    j["params"] = params_json(p);
    for (Eigen::Index i = 0; i < eig.dim(); ++i) {
      j["levels"].push_back({{"level_index", i},
                             {"re_e", eig.values(i).real() / om},
                             {"im_e", eig.values(i).imag() / om},
                             {"parity_index", par[static_cast<std::size_t>(i)]}});
    }
    sink.artifact() << j.dump(2) << '\n';
  }
  sink.summary() << "spectrum: " << eig.dim() << " levels, lowest E/Omega = "
                 << num(eig.values(0).real() / om) << '\n';
}

void cmd_sweep(const Flags& f, const SystemParams& p, Sink& sink) {
  const std::string fmt = f.format.empty() ? "csv" : f.format;
  check_format(fmt);
  if (f.points < 2) throw UsageError("--points must be >= 2");
  if (!(f.to > f.from)) throw UsageError("--to must exceed --from");
  SweepParam param;
  if (f.sweep_param == "g") param = SweepParam::G;
  else if (f.sweep_param == "gamma") param = SweepParam::Gamma;
  else throw UsageError("--param must be g or gamma");

  const double om = p.omega();
  std::vector<double> values;
  for (int k = 0; k < f.points; ++k) {
    values.push_back(om * (f.from + (f.to - f.from) * k / (f.points - 1)));
  }
  const auto branches = track_levels(p, param, values, {false, f.jobs});
  const auto n_levels = std::min<std::size_t>(static_cast<std::size_t>(std::max(f.levels, 1)), branches.size());
  std::vector<std::size_t> subset(n_levels);
  for (std::size_t i = 0; i < n_levels; ++i) subset[i] = i;
  const auto eps = detect_all_ep2(branches, p, param, subset);

  const std::string extra = "param=" + f.sweep_param + " from=" + num(f.from) + " to=" + num(f.to) +
                            " points=" + std::to_string(f.points) + " levels=" + std::to_string(n_levels);
  if (fmt == "csv") {
    auto& os = sink.artifact();
    os << header("sweep", p, extra) << "sweep_value,level_index,re_e,im_e,parity_index\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
      for (std::size_t b = 0; b < n_levels; ++b) {
        const auto& br = branches[b];
        os << num(values[k] / om) << ',' << b << ',' << num(br.energies[k].real() / om) << ','
           << num(br.energies[k].imag() / om) << ',' << br.parities[k] << '\n';
      }
    }
  } else {
    ordered_json j;
    j["command"] = "sweep";
    j["params"] = params_json(p);
    j["sweep"] = {{"param", f.sweep_param}, {"from", f.from}, {"to", f.to}, {"points", f.points}};
    for (std::size_t b = 0; b < n_levels; ++b) {
      ordered_json br;
      br["level_index"] = b;
      br["parity_index"] = branches[b].parity_index;
      for (std::size_t k = 0; k < values.size(); ++k) {
        br["points"].push_back({values[k] / om, branches[b].energies[k].real() / om,
                                branches[b].energies[k].imag() / om, branches[b].parities[k]});
      }
      j["branches"].push_back(br);
    }
    for (const auto& e : eps) {
      j["ep2"].push_back({{"sweep_value_lo", e.lo / om}, {"sweep_value_hi", e.hi / om},
                          {"parity_a", e.parity_a}, {"parity_b", e.parity_b}});
    }
    sink.artifact() << j.dump(2) << '\n';
  }
  if (!f.ep2_output.empty()) {
    auto file = open_side_file(f.ep2_output);
    *file << header("sweep", p, extra) << "sweep_value_lo,sweep_value_hi,parity_a,parity_b\n";
    for (const auto& e : eps) {
      *file << num(e.lo / om) << ',' << num(e.hi / om) << ',' << e.parity_a << ',' << e.parity_b << '\n';
    }
  }
  std::size_t violations = 0;
  for (const auto& e : eps) violations += (e.parity_a * e.parity_b != -1) ? 1 : 0;
  sink.summary() << "sweep: " << n_levels << " branches, " << eps.size() << " EP2 found, "
                 << violations << " without opposite parity\n";
}

void cmd_phase(const Flags& f, const SystemParams& p, Sink& sink) {
  const std::string fmt = f.format.empty() ? "csv" : f.format;
  check_format(fmt);
  const AxisRange gr = parse_range(f.g_range, "g-range");
  const AxisRange yr = parse_range(f.gamma_range, "gamma-range");
  const auto [ng, ny] = parse_grid(f.grid);
  const EffectiveModel model = parse_model(f.model);
  const auto pd = phase_diagram(p, gr, yr, ng, ny, model, f.jobs);
  const std::string extra = "g_range=" + f.g_range + " gamma_range=" + f.gamma_range +
                            " grid=" + f.grid + " model=" + f.model;
  if (fmt == "csv") {
    auto& os = sink.artifact();
    os << header("phase-diagram", p, extra)
       << "g_over_omega,gamma_over_omega,max_im_e,min_level_dist,class\n";
    for (const auto& n : pd.nodes) {
      os << num(n.g) << ',' << num(n.gamma) << ',' << num(n.max_im) << ',' << num(n.min_dist) << ','
         << to_string(n.tag) << '\n';
    }
  } else {
    ordered_json j;
    j["command"] = "phase-diagram";
    j["params"] = params_json(p);
    j["grid"] = {{"n_g", ng}, {"n_gamma", ny}, {"model", f.model}};
    for (const auto& n : pd.nodes) {
      j["nodes"].push_back({{"g_over_omega", n.g}, {"gamma_over_omega", n.gamma},
                            {"max_im_e", n.max_im}, {"min_level_dist", n.min_dist},
                            {"class", std::string(to_string(n.tag))}});
    }
    sink.artifact() << j.dump(2) << '\n';
  }
  std::size_t broken = 0;
  for (const auto& n : pd.nodes) broken += n.max_im > kRealTolerance ? 1 : 0;
  if (!f.contour_output.empty()) {
    auto file = open_side_file(f.contour_output);
    *file << header("phase-diagram", p, extra) << "polyline,g_over_omega,gamma_over_omega\n";
    const auto lines = trace_ep2_line(p, gr, yr, ng, ny, model, f.jobs);
    for (std::size_t l = 0; l < lines.size(); ++l) {
      for (const auto& [x, y] : lines[l]) *file << l << ',' << num(x) << ',' << num(y) << '\n';
    }
  }
  sink.summary() << "phase-diagram: " << pd.nodes.size() << " nodes, " << broken
                 << " in the broken phase\n";
}

void cmd_ep3(const Flags& f, const SystemParams& p, Sink& sink) {
  const std::string fmt = f.format.empty() ? "json" : f.format;
  check_format(fmt);
  const EffectiveModel model = parse_model(f.model);
  const EP3Report rep = find_ep3(p, std::nullopt, model);
  const double om = p.omega();
  if (fmt == "json") {
    ordered_json j;
    j["g_cr"] = rep.g_cr / om;
    j["gamma_cr"] = rep.gamma_cr / om;
    j["triple_energy_re"] = rep.triple_energy.real() / om;
    j["triple_energy_im"] = rep.triple_energy.imag() / om;
    j["rank_ok"] = rep.rank_ok;
    j["residual"] = rep.residual;
    j["units"] = "omega";
    j["model"] = f.model;
    j["newton_iterations"] = rep.iterations;
    j["params"] = params_json(p);
    sink.artifact() << j.dump(2) << '\n';
  } else {
    auto& os = sink.artifact();
    os << header("ep3", p, "model=" + f.model)
       << "g_cr,gamma_cr,triple_energy_re,triple_energy_im,rank_ok,residual\n"
       << num(rep.g_cr / om) << ',' << num(rep.gamma_cr / om) << ',' << num(rep.triple_energy.real() / om)
       << ',' << num(rep.triple_energy.imag() / om) << ',' << (rep.rank_ok ? "true" : "false") << ','
       << num(rep.residual) << '\n';
  }
  sink.summary() << "ep3: g_cr/Omega = " << num(rep.g_cr / om) << ", gamma_cr/Omega = "
                 << num(rep.gamma_cr / om) << ", rank_ok = " << (rep.rank_ok ? "true" : "false") << '\n';
}

void cmd_compare(const Flags& f, const SystemParams& p, Sink& sink) {
  const std::string fmt = f.format.empty() ? "csv" : f.format;
  check_format(fmt);
  if (f.compare_points < 2) throw UsageError("--points must be >= 2");
  if (!(f.g_max > 0.0)) throw UsageError("--g-max must be positive");
  const double om = p.omega();
  std::vector<double> gs;
  for (int k = 0; k < f.compare_points; ++k) gs.push_back(om * f.g_max * k / (f.compare_points - 1));
  const auto rows = compare_effective_vs_ed(p, gs, p.gamma);
  const std::string extra = "g_max=" + num(f.g_max) + " points=" + std::to_string(f.compare_points);
  if (fmt == "csv") {
    auto& os = sink.artifact();
    os << header("compare", p, extra)
       << "g_over_omega,level_index,re_e_ed,im_e_ed,re_e_full,im_e_full,re_e_approx,im_e_approx,"
          "dre_full,dim_full,dre_approx,dim_approx\n";
    for (const auto& r : rows) {
      os << num(r.g) << ',' << r.level << ',' << num(r.e_ed.real()) << ',' << num(r.e_ed.imag()) << ','
         << num(r.e_full.real()) << ',' << num(r.e_full.imag()) << ',' << num(r.e_approx.real()) << ','
         << num(r.e_approx.imag()) << ',' << num(r.dre_full) << ',' << num(r.dim_full) << ','
         << num(r.dre_approx) << ',' << num(r.dim_approx) << '\n';
    }
  } else {
    ordered_json j;
    j["command"] = "compare";
    j["params"] = params_json(p);
    for (const auto& r : rows) {
      j["rows"].push_back({{"g_over_omega", r.g}, {"level_index", r.level},
                           {"re_e_ed", r.e_ed.real()}, {"im_e_ed", r.e_ed.imag()},
                           {"re_e_full", r.e_full.real()}, {"im_e_full", r.e_full.imag()},
                           {"re_e_approx", r.e_approx.real()}, {"im_e_approx", r.e_approx.imag()}});
    }
    sink.artifact() << j.dump(2) << '\n';
  }
  double worst = 0.0;
  std::optional<double> first_cross;
  for (const auto& r : rows) {
    worst = std::max(worst, r.dre_full);
    if (!first_cross && r.dre_full > 1e-2) first_cross = r.g;
  }
  sink.summary() << "compare: max |Re dE|/Omega (exact-form matrix) = " << num(worst)
                 << (first_cross ? ", exceeds 1e-2 from g/Omega = " + num(*first_cross)
                                 : std::string(", never exceeds 1e-2"))
                 << '\n';
}

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--delta", f.delta, "Qubit tunneling amplitude");
  app.add_option("--epsilon", f.epsilon, "Qubit bias");
  app.add_option("--theta-frac", f.theta_frac, "Mixing angle theta = pi/N (Omega = 1)");
  app.add_option("--theta-rad", f.theta_rad, "Mixing angle in radians (Omega = 1)");
  auto* gamma = app.add_option("--gamma", f.gamma, "Gain/loss strength");
  app.add_option("--gamma-over-omega", f.gamma_ratio, "Gain/loss strength in units of Omega")->excludes(gamma);
  auto* g = app.add_option("--g", f.g, "Qubit-resonator coupling");
  app.add_option("--g-over-omega", f.g_ratio, "Coupling in units of Omega")->excludes(g);
  auto* wr = app.add_option("--omega-r", f.omega_r, "Resonator frequency");
  app.add_option("--omega-r-ratio", f.omega_r_ratio, "Resonator frequency in units of Omega")->excludes(wr);
  app.add_option("--nmax", f.n_max, "Boson cutoff (default 7)");
  app.add_option("--config", f.config, "Parameter file (JSON or key = value)");
  app.add_option("--output", f.output, "Artifact path (default: standard output)");
  app.add_option("--format", f.format, "csv or json");
  app.add_option("--jobs", f.jobs, "Worker threads for independent grid points")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-Hermitian Schrieffer-Wolff and exact-diagonalization scanner"};
  app.name("ptsw");
  app.require_subcommand(1);
  Flags f;

  auto* spectrum = app.add_subcommand("spectrum", "Full spectrum at one parameter point");
  auto* sweep = app.add_subcommand("sweep", "Tracked levels and EP2s along a g or gamma sweep");
  auto* phase = app.add_subcommand("phase-diagram", "Cubic phase diagram of the resonant triple");
  auto* ep3 = app.add_subcommand("ep3", "Locate the third-order exceptional point");
  auto* compare = app.add_subcommand("compare", "Effective 3x3 versus exact diagonalization");
  for (auto* sub : {spectrum, sweep, phase, ep3, compare}) add_common(*sub, f);

  sweep->add_option("--param", f.sweep_param, "g or gamma");
  sweep->add_option("--from", f.from, "Start in units of Omega");
  sweep->add_option("--to", f.to, "End in units of Omega");
  sweep->add_option("--points", f.points, "Number of sweep points");
  sweep->add_option("--levels", f.levels, "Lowest branches to export (default 9)");
  sweep->add_option("--ep2-output", f.ep2_output, "EP2 report CSV");
  phase->add_option("--g-range", f.g_range, "g/Omega range lo:hi");
  phase->add_option("--gamma-range", f.gamma_range, "gamma/Omega range lo:hi");
  phase->add_option("--grid", f.grid, "Grid NxM (g by gamma)");
  phase->add_option("--model", f.model, "approx or full");
  phase->add_option("--contour-output", f.contour_output, "EP2 line polylines CSV");
  ep3->add_option("--model", f.model, "approx or full");
  compare->add_option("--g-max", f.g_max, "Largest g/Omega");
  compare->add_option("--points", f.compare_points, "Number of g values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const SystemParams p = resolve(f);
    Sink sink(f.output, out, err);
    if (*spectrum) cmd_spectrum(f, p, sink);
    else if (*sweep) cmd_sweep(f, p, sink);
    else if (*phase) cmd_phase(f, p, sink);
    else if (*ep3) cmd_ep3(f, p, sink);
    else if (*compare) cmd_compare(f, p, sink);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace ptsw::cli
