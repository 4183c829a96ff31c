#include "toric/cli.hpp"

#include "toric/edge_sign.hpp"
#include "toric/solver.hpp"
#include "toric/stability.hpp"
#include "toric/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace toric {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json parse_config(const std::string& text) {
  try {
    return text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("config line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
}

// Typed access to the config object with field-level diagnostics.
class Config {
 public:
  Config(json j, std::set<std::string> allowed) : j_(std::move(j)) {
    if (!j_.is_object()) throw ParseError("config: top level must be an object");
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) throw ParseError("config field '" + k + "': not used by this command");
  }
  bool has(const std::string& k) const { return j_.contains(k); }
  const json& raw(const std::string& k) const { return j_.at(k); }

  template <class T>
  T get(const std::string& k, T dflt) const {
    if (!has(k)) return dflt;
    try {
      return j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw ParseError("config field '" + k + "': wrong type");
    }
  }

 private:
  json j_;
};

TargetFunction target_from(const json& v, const std::string& field) {
  if (v.is_number()) return TargetFunction::constant(v.get<double>());
  if (v.is_array()) {
    if (v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
      throw ParseError("config field '" + field + "': affine K needs three numbers [a0, a1, a2]");
    return TargetFunction::affine(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }
  if (v.is_string()) {
    try {
      return TargetFunction::parse(v.get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError("config field '" + field + "': " + e.what());
    }
  }
  throw ParseError("config field '" + field + "': expected a number, [a0, a1, a2] or an expression");
}

TargetFunction required_target(const Config& c, const std::string& field) {
  if (!c.has(field)) throw ParseError("config field '" + field + "': required");
  return target_from(c.raw(field), field);
}

std::string num(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::shared_ptr<const SmoothPart> load_psi(const Config& c, const std::string& field, const Polytope&) {
  if (!c.has(field)) return nullptr;
  const std::string path = c.get<std::string>(field, "");
  return std::make_shared<SmoothPart>(SmoothPart::from_json(read_file(path)));
}

SolverConfig solver_config(const Config& c) {
  SolverConfig s;
  s.cells = c.get("cells", s.cells);
  s.tol = c.get("tol", s.tol);
  s.max_iter = c.get("max_iter", s.max_iter);
  s.initial_step = c.get("initial_step", s.initial_step);
  s.backtrack = c.get("backtrack", s.backtrack);
  s.clamp_factor = c.get("clamp_factor", s.clamp_factor);
  s.newton = c.get("newton", s.newton);
  if (s.cells < 4) throw ParseError("config field 'cells': must be at least 4");
  if (!(s.tol > 0.0)) throw ParseError("config field 'tol': must be positive");
  if (s.max_iter < 0) throw ParseError("config field 'max_iter': must be non-negative");
  return s;
}

const std::set<std::string> kSolverKeys = {"cells", "tol", "max_iter", "initial_step", "backtrack", "clamp_factor",
                                           "newton"};

std::set<std::string> with(std::set<std::string> s, std::initializer_list<std::string> extra) {
  s.insert(extra.begin(), extra.end());
  return s;
}

using Outputs = std::map<std::string, std::string>;

int cmd_check(const Polytope& P, const Config&, std::ostream& out, Outputs&) {
  out << "polytope: " << (P.name().empty() ? "<file>" : P.name()) << "\n";
  out << "facets: " << P.size() << "\n";
  out << "vertex determinants:";
  for (int d : P.vertex_determinants()) out << ' ' << d;
  out << "\ndelzant: yes\n";
  out << "area: " << num(P.area()) << "\n";
  return 0;
}

int cmd_extremal(const Polytope& P, const Config&, std::ostream& out, Outputs&) {
  const AffineFunction a = extremal_affine(P);
  out << "extremal affine K: " << a.str() << "\n";
  return 0;
}

int cmd_analyze(const Polytope& P, const Config& c, std::ostream& out, Outputs& files) {
  const int cells = c.get("cells", 64);
  const int xcells = c.get("x_cells", 33);
  const double xhalf = c.get("x_half", 3.0);
  if (cells < 2 || xcells < 3 || !(xhalf > 0.0)) throw ParseError("config: grid sizes must be positive");
  const auto psi = load_psi(c, "psi", P);
  const PotentialPtr u = psi ? symplectic_potential(P, psi) : guillemin(P);
  const PotentialPtr g = guillemin(P);
  const GridSpec grid = polytope_grid(P, cells, 0);
  const ScalarField S = sample_field(P, grid, kThirdClamp, [&](const Vec2& p) { return abreu_scalar(*u, p); });
  const ScalarField det =
      sample_field(P, grid, kEvalClamp, [&](const Vec2& p) { return u->hessian(p).determinant(); });
  const ScalarField theta =
      sample_field(P, grid, kThirdClamp, [&](const Vec2& p) { return affine_invariants(*u, p).Theta; });
  const MetricDiagnostics md = metric_diagnostics(*u, *g, default_xgrid(*g, P, xcells, xhalf));
  files["S.csv"] = field_csv(S);
  files["det.csv"] = field_csv(det);
  files["theta.csv"] = field_csv(theta);
  files["W.csv"] = field_csv({md.grid, md.W});
  files["H.csv"] = field_csv({md.grid, md.H});
  double smin = 1e300, smax = -1e300;
  for (double v : S.values)
    if (!std::isnan(v)) smin = std::min(smin, v), smax = std::max(smax, v);
  out << "S range: [" << num(smin) << ", " << num(smax) << "]\n";
  out << "H range: [" << num(md.min_H) << ", " << num(md.max_H) << "]\n";
  return 0;
}

int cmd_stability(const Polytope& P, const Config& c, std::ostream& out, Outputs& files) {
  const TargetFunction K = required_target(c, "K");
  ScanOptions o;
  o.angles = c.get("angles", o.angles);
  o.offsets = c.get("offsets", o.offsets);
  o.refine_rounds = c.get("refine_rounds", o.refine_rounds);
  o.keep = c.get("keep", o.keep);
  o.keep_surface = c.get("surface", false);
  const StabilityReport r = scan_uniform_stability(P, K, o);
  out << "lambda_est: " << num(r.lambda_est) << " (" << r.lambda_label << ")\n";
  out << "worst crease: theta " << num(r.worst.theta) << ", c " << num(r.worst.c) << ", a (" << num(r.worst.a.x())
      << ", " << num(r.worst.a.y()) << "), offset " << num(r.worst.offset) << ", ratio " << num(r.worst.ratio)
      << "\n";
  out << "affine probes: L(1) " << num(r.probe.L1) << ", L(xi1) " << num(r.probe.Lx) << ", L(xi2) "
      << num(r.probe.Ly) << "\n";
  out << "creases evaluated: " << r.evaluated << ", negative: " << r.negative_count << "\n";
  const char* verdict = r.affine_unstable          ? "not polystable (affine pair)"
                        : r.negative_count > 0     ? "not polystable (crease witness)"
                        : r.lambda_est > 0.0       ? "no destabilizer found; uniform stability estimate positive"
                                                   : "inconclusive";
  out << "verdict: " << verdict << "\n";
  if (o.keep_surface) files["scan.csv"] = scan_csv(r);
  return 0;
}

void solve_outputs(const Polytope& P, const NodeFunction& K, const std::shared_ptr<SmoothPart>& psi,
                   const SolverConfig& cfg, Outputs& files) {
  files["psi.json"] = psi->to_json();
  const double clamp = cfg.clamp_factor * psi->grid().h.maxCoeff();
  files["residual.csv"] = field_csv(residual(P, psi, K, clamp));
}

// Optional "balance": add the affine function that makes L_K vanish on affine functions.
TargetFunction balanced_target(const Polytope& P, const Config& c, const std::string& field, std::ostream& out) {
  TargetFunction K = required_target(c, field);
  if (c.get("balance", false)) {
    K = affine_balance(P, K);
    out << "balanced " << field << ": " << K.str() << "\n";
  }
  return K;
}

int cmd_solve(const Polytope& P, const Config& c, std::ostream& out, Outputs& files) {
  const TargetFunction K = balanced_target(P, c, "K", out);
  const SolverConfig cfg = solver_config(c);
  const auto psi0 = load_psi(c, "psi0", P);
  const SolveReport r = solve(P, K, cfg, psi0);
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  out << "mode: " << (cfg.newton ? "newton" : "first-order") << "\n";
  out << "converged: " << (r.state.converged ? "yes" : "no") << "\n";
  out << "iterations: " << r.state.iteration << "\n";
  out << "residual: " << num(r.state.residual) << "\n";
  if (!r.state.history.empty()) out << "F_K: " << num(r.state.history.back().F) << "\n";
  out << "oscillation: " << num(r.state.oscillation) << "\n";
  out << "convexity margin: " << num(r.state.convexity_margin) << "\n";
  if (!r.state.diagnosis.empty()) out << "diagnosis: " << r.state.diagnosis << "\n";
  files["history.csv"] = history_csv(r.state.history);
  solve_outputs(P, [&K](const Vec2& p) { return K(p); }, r.psi, cfg, files);
  return r.state.converged ? 0 : 1;
}

int cmd_continuity(const Polytope& P, const Config& c, std::ostream& out, Outputs& files) {
  const TargetFunction K1 = balanced_target(P, c, "K1", out);
  std::optional<TargetFunction> K0;
  if (c.has("K0")) K0 = target_from(c.raw("K0"), "K0");
  const int steps = c.get("steps", 10);
  if (steps < 1) throw ParseError("config field 'steps': must be at least 1");
  const SolverConfig cfg = solver_config(c);
  const ContinuityPath path = continuity_solve(P, K0, K1, steps, cfg);
  for (const auto& w : path.warnings) out << "warning: " << w << "\n";
  std::string csv = "t,iterations,cold_initial_residual,initial_residual,final_residual,converged,F_decreasing\n";
  for (const auto& s : path.steps) {
    csv += num(s.t) + "," + std::to_string(s.iterations) + "," + num(s.cold_initial_residual) + "," +
           num(s.initial_residual) + "," + num(s.final_residual) + "," + (s.converged ? "1" : "0") + "," +
           (s.F_strictly_decreasing ? "1" : "0") + "\n";
    out << "t " << num(s.t) << ": " << s.iterations << " iterations, residual " << num(s.final_residual) << "\n";
  }
  out << "completed: " << (path.completed ? "yes" : "no") << "\n";
  out << "last good t: " << num(path.last_good_t) << "\n";
  if (!path.diagnosis.empty()) out << "diagnosis: " << path.diagnosis << "\n";
  files["continuity.csv"] = csv;
  files["psi.json"] = path.psi->to_json();
  return path.completed ? 0 : 1;
}

int cmd_construct(const Polytope& P, const Config& c, std::ostream& out, Outputs& files) {
  EdgeSignSpec s;
  if (!c.has("signs")) throw ParseError("config field 'signs': required");
  s.signs = c.get<std::vector<int>>("signs", {});
  s.delta = c.get("delta", s.delta);
  s.eps = c.get("eps", s.eps);
  s.a_magnitude = c.get("a", s.a_magnitude);
  s.c = c.get("c", s.c);
  s.q_fraction = c.get("q_fraction", s.q_fraction);
  const int samples = c.get("window_samples", 9);
  const EdgeSignResult r = prescribe_edge_sign(P, s, samples);
  std::string csv = "edge,sign,q1,q2,a,c,c_raised,S_at_q,S_min,S_max,sign_ok\n";
  for (const auto& w : r.windows) {
    out << "edge " << w.edge << ": requested " << (w.requested_sign > 0 ? "+" : "-") << ", a " << num(w.a) << ", c "
        << num(w.c) << (w.c_raised ? " (raised)" : "") << ", S(q) " << num(w.S_at_q) << ", window ["
        << num(w.S_min) << ", " << num(w.S_max) << "] " << (w.sign_ok ? "ok" : "WRONG SIGN") << "\n";
    csv += std::to_string(w.edge) + "," + std::to_string(w.requested_sign) + "," + num(w.q.x()) + "," +
           num(w.q.y()) + "," + num(w.a) + "," + num(w.c) + "," + (w.c_raised ? "1" : "0") + "," +
           num(w.S_at_q) + "," + num(w.S_min) + "," + num(w.S_max) + "," + (w.sign_ok ? "1" : "0") + "\n";
  }
  files["edge_sign.csv"] = csv;
  return r.all_signs_ok ? 0 : 1;
}

int cmd_verify(const Polytope& P, const Config& c, std::ostream& out, Outputs& files) {
  const auto psi = load_psi(c, "psi", P);
  const PotentialPtr u = psi ? symplectic_potential(P, psi) : guillemin(P);
  const PotentialPtr g = guillemin(P);
  const int n = c.get("samples", 40);
  const double margin = c.get("margin", 0.01);
  const std::vector<Vec2> pts = interior_samples(P, n, margin);
  double Ko;
  if (c.has("K_o")) {
    Ko = c.get("K_o", 0.0);
  } else {
    Ko = 0.0;
    for (const Vec2& p : pts) Ko = std::max(Ko, std::abs(abreu_scalar(*u, p)));
    Ko *= 1.0 + 1e-9;
  }
  std::vector<ValidationReport> reps;
  reps.push_back(det_lower_bound_check(*u, P, Ko, pts));
  reps.push_back(facet_det_check(*u, P, c.get("facet", 0)));
  reps.push_back(boundary_slope_check(*u, P, c.get("s1", 1e-3)));
  reps.push_back(h_upper_bound_check(*u, *g, default_xgrid(*g, P, c.get("x_cells", 33), c.get("x_half", 3.0))));
  bool fail = false;
  for (const auto& r : reps) {
    out << report_text(r) << "\n";
    files[r.name + ".csv"] = report_csv(r);
    fail = fail || r.verdict == Verdict::Fail;
  }
  return fail ? 1 : 0;
}

struct Command {
  int (*run)(const Polytope&, const Config&, std::ostream&, Outputs&);
  std::set<std::string> keys;
};

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> m = {
      {"check", {cmd_check, {}}},
      {"analyze", {cmd_analyze, {"cells", "psi", "x_cells", "x_half"}}},
      {"extremal-k", {cmd_extremal, {}}},
      {"stability", {cmd_stability, {"K", "angles", "offsets", "refine_rounds", "keep", "surface"}}},
      {"solve", {cmd_solve, with(kSolverKeys, {"K", "psi0", "balance"})}},
      {"continuity", {cmd_continuity, with(kSolverKeys, {"K0", "K1", "steps", "balance"})}},
      {"construct-k", {cmd_construct, {"signs", "delta", "eps", "a", "c", "q_fraction", "window_samples"}}},
      {"verify", {cmd_verify, {"psi", "K_o", "samples", "margin", "facet", "s1", "x_cells", "x_half"}}},
  };
  return m;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Toric extremal metric toolkit"};
  std::string command, polytope, config, outdir;
  std::vector<std::string> names;
  for (const auto& [k, v] : commands()) names.push_back(k);
  app.add_option("command", command, "check | analyze | extremal-k | stability | solve | continuity | "
                                     "construct-k | verify")
      ->required()
      ->check(CLI::IsMember(names));
  app.add_option("--polytope", polytope, "fixture name (square, simplex, hirzebruch) or JSON file")->required();
  app.add_option("--config", config, "JSON run configuration");
  app.add_option("--out", outdir, "output directory for CSV and JSON artifacts");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  Outputs files;
  int status = 0;
  try {
    const std::string cfg_text = config.empty() ? std::string() : read_file(config);
    if (!polytope.empty() && polytope != "square" && polytope != "simplex" && polytope != "hirzebruch" &&
        !fs::exists(polytope))
      throw UsageError("polytope '" + polytope + "' is neither a fixture name nor an existing file");
    if (!outdir.empty() && fs::exists(outdir) && !fs::is_directory(outdir))
      throw UsageError("--out '" + outdir + "' exists and is not a directory");
    const Command& cmd = commands().at(command);
    const Config cfg(parse_config(cfg_text), cmd.keys);
    const Polytope P = load_polytope(polytope);
    status = cmd.run(P, cfg, out, files);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  if (!outdir.empty()) {
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) {
      err << "error: cannot create '" << outdir << "': " << ec.message() << "\n";
      return 1;
    }
    for (const auto& [name, text] : files) {
      std::ofstream f(fs::path(outdir) / name, std::ios::binary);
      f << text;
      if (!f) {
        err << "error: cannot write '" << (fs::path(outdir) / name).string() << "'\n";
        return 1;
      }
    }
  }
  return status;
}

}  // namespace toric
