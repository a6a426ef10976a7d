#include "oswitch/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "oswitch/domain.hpp"
#include "oswitch/errors.hpp"
#include "oswitch/lattice.hpp"
#include "oswitch/markov.hpp"
#include "oswitch/rbsde.hpp"
#include "oswitch/simulator.hpp"

namespace oswitch {

using nlohmann::json;

namespace {

std::string g6(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v + 0.0;  // no "-0"
  return os.str();
}

std::string g17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string vec6(const Vector& v) {
  std::string s = "(";
  for (Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + g6(v(i));
  return s + ")";
}

void print_matrix(std::ostream& out, const Matrix& m, const std::string& indent = "    ") {
  for (Index i = 0; i < m.rows(); ++i) {
    out << indent;
    for (Index j = 0; j < m.cols(); ++j) out << std::setw(13) << g6(m(i, j));
    out << "\n";
  }
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

std::uint64_t effective_seed(const ProblemConfig& cfg, const CommandOptions& opt) {
  return opt.seed ? *opt.seed : config_run(cfg).seed;
}

void header(std::ostream& out, const std::string& cmd, const ProblemConfig& cfg, const CommandOptions& opt) {
  out << std::boolalpha << "oblique-switch " << cmd << "\n  config: " << cfg.source << "  hash: " << config_hash(cfg)
      << "  seed: " << effective_seed(cfg, opt) << "\n";
}

void write_file(const CommandOptions& opt, const std::string& name, const std::string& content, std::ostream& out) {
  if (opt.outDir.empty()) return;
  std::filesystem::create_directories(opt.outDir);
  const auto path = std::filesystem::path(opt.outDir) / name;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
  out << "  wrote " << path.string() << "\n";
}

std::string builtin_name(const ProblemConfig& cfg) {
  const json& m = cfg.doc["model"];
  return m.contains("builtin") ? m["builtin"].get<std::string>() : std::string();
}

json machine_header(const std::string& cmd, const ProblemConfig& cfg, const CommandOptions& opt) {
  return {{"command", cmd}, {"config_hash", config_hash(cfg)}, {"seed", effective_seed(cfg, opt)}, {"config", cfg.doc}};
}

}  // namespace

Construction parse_construction(const std::string& name) {
  if (name == "markovian") return Construction::markovian;
  if (name == "dim3") return Construction::dim3;
  if (name == "symmetric") return Construction::symmetric;
  if (name == "controlled-dim3") return Construction::controlled_dim3;
  throw ConfigError("--construction: expected markovian, dim3, symmetric or controlled-dim3, got '" + name + "'");
}

int cmd_domain(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const auto model = config_model(cfg);
  header(out, "domain", cfg, opt);
  const auto cert = nonemptiness_report(model);
  json rec = machine_header("domain", cfg, opt);

  out << "  model: " << model.name << "  d = " << model.d << "  controls = " << model.control_count()
      << (model.closedFormObstacle ? " (continuum)" : "") << "\n";
  out << "  verdict: " << to_string(cert.verdict) << "\n";
  out << "  LP max uniform slack s* = " << g6(cert.lpSlack) << "  anchor " << vec6(cert.anchor) << "\n";
  rec["verdict"] = to_string(cert.verdict);
  rec["lp_slack"] = cert.lpSlack;
  rec["anchor"] = vec_json(cert.anchor);

  if (cert.uncontrolled && cert.markovAvailable) {
    const auto& pc = cert.perControl.front();
    const ChainAnalysis a = analyze_chain(model.P[0], model.cbar[0]);
    out << "  conditions (non-empty / non-empty interior):\n"
        << "    LP feasible            " << cert.condLp << " / " << cert.strictLp << "   s* = " << g6(cert.lpSlack) << "\n"
        << "    some pair C_ij+C_ji    " << cert.condSomePair << " / " << cert.strictSomePair
        << "   max = " << g6(pc.pairMax) << "\n"
        << "    mu.cbar                " << cert.condMuCbar << " / " << cert.strictMuCbar << "   value = " << g6(pc.muCbar)
        << "\n"
        << "    all pairs C_ij+C_ji    " << cert.condAllPairs << " / " << cert.strictAllPairs
        << "   min = " << g6(pc.pairMin) << "\n"
        << "    agree: " << (cert.conditionsAgree ? "yes" : "NO") << "\n";
    out << "  mu = " << vec6(a.mu) << "\n  excursion costs C:\n";
    print_matrix(out, a.C);
    out << "  round-trip costs " << vec6(a.CbarDiag) << "\n";
    rec["conditions"] = {{"lp", {cert.condLp, cert.strictLp}},
                         {"some_pair", {cert.condSomePair, cert.strictSomePair}},
                         {"mu_cbar", {cert.condMuCbar, cert.strictMuCbar}},
                         {"all_pairs", {cert.condAllPairs, cert.strictAllPairs}},
                         {"agree", cert.conditionsAgree}};
    rec["mu"] = vec_json(a.mu);
    rec["mu_cbar"] = a.muCbar;
    rec["C"] = mat_json(a.C);
    rec["pair_min"] = pc.pairMin;
    rec["pair_max"] = pc.pairMax;
    for (const auto& w : a.warnings) out << "  warning: " << w << "\n";
    if (cert.triangleOk) out << "  triangle inequality on C: " << (*cert.triangleOk ? "holds" : "fails") << "\n";
    if (cert.verdict == Verdict::nonempty_interior) {
      const Matrix V = slice_vertices(a);
      out << "  slice vertices (columns):\n";
      print_matrix(out, V);
      rec["vertices"] = mat_json(V);
    }
  } else if (cert.markovAvailable) {
    const std::size_t U = cert.perControl.size(), shown = U <= 12 ? U : 5;
    for (std::size_t u = 0; u < U; ++u) {
      if (u == shown && u + 1 < U) {
        out << "  ... " << U - shown - 1 << " more controls\n";
        u = U - 1;
      }
      const auto& pc = cert.perControl[u];
      out << "  control " << g6(model.controls[u]) << ": mu.cbar = " << g6(pc.muCbar) << "  pair sums ["
          << g6(pc.pairMin) << ", " << g6(pc.pairMax) << "]\n";
    }
    if (cert.Chat) {
      out << "  Chat = min_u C^u:\n";
      print_matrix(out, *cert.Chat);
      out << "  min pair Chat_ij + Chat_ji = " << g6(cert.ChatPairMin) << "\n";
      rec["Chat"] = mat_json(*cert.Chat);
      rec["Chat_pair_min"] = cert.ChatPairMin;
    }
    if (cert.muChat) {
      out << "  mu = " << vec6(*cert.mu) << "  mu.chat = " << g6(*cert.muChat) << "\n";
      rec["mu"] = vec_json(*cert.mu);
      rec["mu_chat"] = *cert.muChat;
    }
  }
  for (const auto& n : cert.notes) out << "  note: " << n << "\n";
  rec["notes"] = cert.notes;
  write_file(opt, "domain.json", rec.dump(2) + "\n", out);
  return 0;
}

int cmd_build_h(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const auto model = config_model(cfg);
  const std::string builtin = builtin_name(cfg);
  header(out, "build-h", cfg, opt);

  if (builtin == "dim4") {
    const Dim4Witness w = dim4_counterexample();
    out << "  the 4-state chain admits no Markovian reflection operator\n"
        << "  Q^(4,4) copositivity: " << to_string(w.copositivity.status) << " (" << w.copositivity.method << ")\n"
        << "  witness v = " << vec6(w.v) << "\n  v^T H v = " << g17(w.vHv) << "\n";
    json rec = machine_header("build-h", cfg, opt);
    rec["witness"] = {{"v", vec_json(w.v)},   {"vHv", w.vHv}, {"H", mat_json(w.H)},
                      {"n1", vec_json(w.n1)}, {"n2", vec_json(w.n2)}, {"n3", vec_json(w.n3)}};
    write_file(opt, "h_witness.json", rec.dump(2) + "\n", out);
    throw GeometryError("build-h: construction impossible for this chain (v^T H v = " + g6(w.vHv) + ")");
  }

  Construction c = Construction::markovian;
  if (opt.construction) c = *opt.construction;
  else if (builtin == "dim3") c = Construction::dim3;
  else if (builtin == "symmetric") c = Construction::symmetric;
  else if (builtin == "example3") c = Construction::controlled_dim3;

  ReflectionField field;
  switch (c) {
    case Construction::markovian:
      field = build_H_markovian(model);
      break;
    case Construction::dim3: {
      if (!model.uncontrolled() || model.d != 3)
        throw CapabilityError("build-h dim3: needs an uncontrolled 3-state model");
      const Matrix& P = model.P[0];
      if (P.diagonal().cwiseAbs().maxCoeff() > 0.0)
        throw CapabilityError("build-h dim3: needs a zero diagonal");
      field = build_H_dim3(P(0, 1), P(1, 0), P(2, 0), model.cbar[0]);
      break;
    }
    case Construction::symmetric: {
      if (!model.uncontrolled() || model.d < 3)
        throw CapabilityError("build-h symmetric: needs an uncontrolled model with d >= 3");
      const auto ref = builtin::symmetric(static_cast<int>(model.d));
      if ((ref.P[0] - model.P[0]).cwiseAbs().maxCoeff() > 1e-15)
        throw CapabilityError("build-h symmetric: transition matrix is not the symmetric family");
      field = build_H_symmetric(static_cast<int>(model.d));
      field.model = model;
      field.vertices = slice_vertices(model);
      field.halfSpaces = half_spaces(model);
      break;
    }
    case Construction::controlled_dim3:
      if (builtin != "example3")
        throw CapabilityError("build-h controlled-dim3: only the quadratic-cost 3-state example is covered");
      field = build_H_controlled_dim3_vertices();
      break;
  }

  const auto run = config_run(cfg);
  const HCertificate hc = verify_H(field, run.samples, effective_seed(cfg, opt));
  out << "  construction: " << to_string(c) << "\n";
  for (const auto& n : field.notes) out << "  note: " << n << "\n";
  out << "  eta_min = " << g6(hc.etaMin) << "  cone defect = " << g6(hc.coneMaxDefect) << "  |H| <= " << g6(hc.L)
      << "  samples = " << hc.samples << "\n";
  json rec = machine_header("build-h", cfg, opt);
  rec["construction"] = to_string(c);
  rec["vertices"] = mat_json(field.vertices);
  rec["vertex_matrices"] = json::array();
  for (const auto& H : field.vertexMatrices) rec["vertex_matrices"].push_back(mat_json(H));
  if (c == Construction::symmetric) {
    const int d = static_cast<int>(model.d);
    const Matrix& Hd = field.vertexMatrices.back();
    out << "  det H(y^d) = " << g6(Hd.determinant()) << "  closed form " << g6(symmetric_family_det(d)) << "\n"
        << "  tr H(y^d)  = " << g6(Hd.trace()) << "  closed form " << g6(symmetric_family_trace(d)) << "\n";
    rec["det"] = {Hd.determinant(), symmetric_family_det(d)};
    rec["trace"] = {Hd.trace(), symmetric_family_trace(d)};
  }
  for (std::size_t j = 0; j < field.vertexMatrices.size(); ++j) {
    out << "  H at vertex " << j + 1 << ":\n";
    print_matrix(out, field.vertexMatrices[j]);
  }
  for (const auto& f : hc.failures) out << "  failure: " << f << "\n";
  out << "  certificate: " << (hc.passed ? "PASS" : "FAIL") << "\n";
  write_file(opt, "h_certificate.txt", hc.to_record(), out);
  write_file(opt, "h_field.json", rec.dump(2) + "\n", out);
  if (!hc.passed) throw GeometryError("build-h: certificate failed");
  return 0;
}

int cmd_solve(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const auto model = config_model(cfg);
  const auto sde = config_sde(cfg);
  const auto spec = config_lattice(cfg);
  const auto driver = config_driver(cfg);
  const auto run = config_run(cfg);
  header(out, "solve", cfg, opt);

  const auto cert = nonemptiness_report(model);
  if (!cert.lpFeasible) throw GeometryError("solve: domain is empty (LP slack " + g6(cert.lpSlack) + ")");

  const Lattice lattice = build_lattice(sde, spec);
  SolveOptions so;
  so.interiorPoint = run.interiorPoint;
  const LatticeSolution sol = solve(model, lattice, driver, so);
  const auto& dg = sol.diagnostics;
  out << "  lattice: " << to_string(spec.mode) << "  steps = " << spec.steps << "  points = " << lattice.points()
      << "  dt = " << g6(lattice.dt) << "\n"
      << "  Y(0, x0) = " << vec6(sol.root()) << "\n"
      << "  membership defect = " << g6(dg.membershipDefect) << "  Skorokhod defect = " << g6(dg.skorokhodDefect)
      << "\n  terminal projection defect = " << g6(dg.terminalProjectionDefect)
      << "  Picard iterations = " << dg.picardIters << "  residual = " << g6(dg.picardResidual) << "\n";
  if (dg.shifted) out << "  solved on the shifted domain, shift " << vec6(dg.shift) << "\n";
  for (const auto& w : dg.warnings) out << "  warning: " << w << "\n";

  const std::uint64_t seed = effective_seed(cfg, opt);
  if (!opt.outDir.empty()) {
    std::ostringstream csv;
    write_solution_csv(csv, sol,
                       {{"config_hash", config_hash(cfg)},
                        {"seed", std::to_string(seed)},
                        {"model", model.name}});
    write_file(opt, "solution.csv", csv.str(), out);
  }

  const int refine = opt.refine ? *opt.refine : run.refine;
  if (refine > 0) {
    if (refine < 2) throw ConfigError("--refine: need k >= 2 (at least 3 resolutions)");
    std::vector<LatticeSpec> specs;
    for (int r = 0; r <= refine; ++r) {
      LatticeSpec s = spec;
      s.steps = spec.steps << r;
      specs.push_back(s);
    }
    const ConvergenceTable t = refine_and_extrapolate(model, sde, specs, driver);
    std::ostringstream csv;
    csv << "# config_hash: " << config_hash(cfg) << "\n# seed: " << seed << "\nsteps,refused,diff,order";
    for (Index i = 0; i < model.d; ++i) csv << ",Y" << i + 1;
    csv << "\n";
    out << "  refinement:\n";
    for (const auto& row : t.rows) {
      out << "    N = " << std::setw(5) << row.steps;
      csv << row.steps << "," << row.refused << "," << g17(row.diff) << "," << g17(row.order);
      if (row.refused) {
        out << "  refused: " << row.message << "\n";
        for (Index i = 0; i < model.d; ++i) csv << ",";
      } else {
        out << "  Y = " << vec6(row.root) << "  diff = " << g6(row.diff) << "  order = " << g6(row.order) << "\n";
        for (Index i = 0; i < model.d; ++i) csv << "," << g17(row.root(i));
      }
      csv << "\n";
    }
    out << "  differences " << (t.monotone ? "decrease monotonically" : "are not monotone") << "\n";
    if (t.extrapolated) out << "  extrapolated Y(0, x0) = " << vec6(*t.extrapolated) << "\n";
    for (const auto& n : t.notes) out << "  note: " << n << "\n";
    write_file(opt, "convergence.csv", csv.str(), out);
  }
  return 0;
}

int cmd_verify(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const auto model = config_model(cfg);
  const auto driver = config_driver(cfg);
  if (driver.dependsOnY || driver.dependsOnZ)
    throw CapabilityError("verify: the driver depends on (y, z); strategy rewards need a (y,z)-free driver, use solve");
  const auto run = config_run(cfg);
  header(out, "verify", cfg, opt);
  const Lattice lattice = build_lattice(config_sde(cfg), config_lattice(cfg));
  const auto report = verify_representation(model, driver, lattice, run.paths, effective_seed(cfg, opt), run.baselines);
  out << report.to_text();
  std::string text = "# config_hash: " + config_hash(cfg) + "\n" + report.to_text();
  write_file(opt, "verify_report.txt", text, out);
  return report.passed ? 0 : 1;
}

int cmd_polygon(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const auto model = config_model(cfg);
  if (model.d != 3) throw CapabilityError("polygon: needs d = 3");
  const auto run = config_run(cfg);
  header(out, "polygon", cfg, opt);
  const auto pts = emit_slice_polygon(model, run.resolution);

  auto to_csv = [&](const std::vector<Vector>& ps) {
    std::ostringstream csv;
    csv << "# config_hash: " << config_hash(cfg) << "\n# model: " << model.name << "\nindex,y1,y2,y3,slack\n";
    for (std::size_t k = 0; k < ps.size(); ++k)
      csv << k << "," << g17(ps[k](0)) << "," << g17(ps[k](1)) << "," << g17(ps[k](2)) << ","
          << g17(membership(ps[k], model, 0.0).slack) << "\n";
    return csv.str();
  };
  double worst = 0.0;
  for (const auto& p : pts) worst = std::min(worst, membership(p, model, 0.0).slack);
  out << "  model: " << model.name << "  boundary points: " << pts.size() << "  min slack " << g6(worst) << "\n";
  if (pts.size() <= 12)
    for (const auto& p : pts) out << "    " << vec6(p) << "\n";
  write_file(opt, "polygon.csv", to_csv(pts), out);
  if (!model.uncontrolled() && !model.closedFormObstacle) {
    const auto corners = slice_polygon_corners(model);
    out << "  exact corners: " << corners.size() << "\n";
    write_file(opt, "polygon_corners.csv", to_csv(corners), out);
  }
  return 0;
}

int run_command(const std::string& name, const CommandOptions& opt, std::ostream& out) {
  const ProblemConfig cfg = load_config(opt.configPath);
  if (name == "domain") return cmd_domain(cfg, opt, out);
  if (name == "build-h") return cmd_build_h(cfg, opt, out);
  if (name == "solve") return cmd_solve(cfg, opt, out);
  if (name == "verify") return cmd_verify(cfg, opt, out);
  if (name == "polygon") return cmd_polygon(cfg, opt, out);
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace oswitch
