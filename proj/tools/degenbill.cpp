// degenbill: experiments with billiards of degenerate metrics.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid config or flags.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/LU>

#include "degenbill/config.hpp"
#include "degenbill/output.hpp"
#include "degenbill/parallel.hpp"

using namespace degenbill;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string preset;
  double energy = 1.0;
  std::optional<double> tol;
  std::optional<double> max_time;
  std::string out = ".";
  std::string format = "csv";
  int workers = 0;
};

struct Context {
  DomainConfig cfg;
  std::shared_ptr<const Domain> domain;
  BilliardOptions bopts;
  std::filesystem::path out;
  Format format = Format::Csv;
  double energy = 1.0;
  std::optional<unsigned long long> seed;
};

Context make_context(const Common& c) {
  Context ctx;
  if (!c.config.empty())
    ctx.cfg = load_config_file(c.config);
  else
    ctx.cfg = preset_config(c.preset.empty() ? "disk" : c.preset);
  if (c.tol) ctx.cfg.integrator.tol = *c.tol;
  if (c.max_time) ctx.cfg.integrator.max_time = *c.max_time;
  if (!(ctx.cfg.integrator.tol > 0.0)) throw ConfigError("integrator.tol", "must be positive");
  if (!(ctx.cfg.integrator.max_time > 0.0)) throw ConfigError("integrator.max_time", "must be positive");
  if (!(c.energy > 0.0)) throw ConfigError("energy", "must be positive");
  try {
    ctx.format = parse_format(c.format);
  } catch (const Error& e) {
    throw ConfigError("format", e.what());
  }
  ctx.domain = build_domain(ctx.cfg);
  ctx.bopts.tol = ctx.cfg.integrator.tol;
  ctx.bopts.max_time = ctx.cfg.integrator.max_time;
  ctx.energy = c.energy;
  ctx.out = c.out;
  std::filesystem::create_directories(ctx.out);
  if (const char* s = std::getenv("DEGENBILL_SEED")) {
    try {
      ctx.seed = std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigError("DEGENBILL_SEED", "expected a non-negative integer");
    }
  }
  set_default_workers(c.workers);
  return ctx;
}

std::vector<double> vec_of(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec to_vec(const std::vector<double>& v, int n, const std::string& path) {
  if (static_cast<int>(v.size()) != n)
    throw ConfigError(path, "expected " + std::to_string(n) + " components, got " + std::to_string(v.size()));
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = v[i];
  return out;
}

// Rescales p so that H = h at x.
Vec at_energy(const Domain& d, const Vec& x, Vec p, double h) {
  const double h0 = hamiltonian(d, make_interior(d, x, p));
  if (!(h0 > 0.0)) throw ConfigError("start.p", "momentum must be nonzero at an interior point");
  return p * std::sqrt(h / h0);
}

// ---- simulate

struct SimArgs {
  std::vector<double> x, p;
  std::optional<double> q, ps;
  int sheet = 1;
  double t_end = 10.0;
  double dt = 0.0;
};

int cmd_simulate(const Context& ctx, const SimArgs& a) {
  const Domain& d = *ctx.domain;
  const int n = d.dim();
  PhasePoint start;
  if (a.q) {
    if (!d.has_boundary()) throw ConfigError("start.q", "section starts need n = 2");
    SectionPoint sp;
    sp.q = *a.q;
    sp.p = a.ps.value_or(0.0);
    sp.sheet = a.sheet;
    sp.h = ctx.energy;
    start = launch(d, sp);
  } else {
    if (a.x.empty()) throw ConfigError("start", "give --x and --p, or --q for a section start");
    const Vec x = to_vec(a.x, n, "start.x");
    if (!(d.phi(x) > 0.0)) throw ConfigError("start.x", "start point must satisfy phi > 0");
    start = make_interior(d, x, at_energy(d, x, to_vec(a.p, n, "start.p"), ctx.energy), a.sheet);
  }
  FlowOptions fo;
  fo.tol = ctx.bopts.tol;
  fo.t_end = a.t_end;
  if (a.dt > 0.0) {
    fo.record_samples = false;
    for (int k = 0; k * a.dt <= std::abs(a.t_end) * (1 + 1e-15); ++k)
      fo.output_times.push_back(std::copysign(k * a.dt, a.t_end));
  }
  const Trajectory tr = integrate(d, start, fo);

  Table t;
  t.columns = {"t", "chart", "sheet"};
  for (int i = 0; i < n; ++i) t.columns.push_back("x" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) t.columns.push_back("p" + std::to_string(i + 1));
  t.columns.insert(t.columns.end(), {"xi", "alpha", "H"});
  const auto& samples = a.dt > 0.0 ? tr.outputs : tr.samples;
  for (const Sample& s : samples) {
    const PhasePoint& pt = s.point;
    std::vector<double> row = {s.t, pt.chart == Chart::Collar ? 1.0 : 0.0, static_cast<double>(pt.sheet)};
    for (int i = 0; i < n; ++i) row.push_back(pt.x[i]);
    for (int i = 0; i < n; ++i) row.push_back(pt.p[i]);
    row.insert(row.end(), {pt.xi, pt.alpha, hamiltonian(d, pt)});
    t.add(std::move(row));
  }
  const std::string file = write_table(t, ctx.out, "trajectory", ctx.format);
  json ev = json::array();
  for (const Event& e : tr.events) ev.push_back(to_json(e));
  json j = {{"domain", d.name()},
            {"trajectory", file},
            {"t_final", tr.t_final},
            {"steps", tr.steps},
            {"rejected", tr.rejected},
            {"max_rel_energy_drift", tr.max_rel_drift},
            {"events", ev}};
  write_json(j, ctx.out / "events.json");
  return 0;
}

// ---- billiard

struct BilliardArgs {
  double q = 0.0;
  double p = 2.0;
  int bounces = 100;
  int sheet = 1;
};

int cmd_billiard(const Context& ctx, const BilliardArgs& a) {
  const Domain& d = *ctx.domain;
  if (!d.has_boundary()) throw ConfigError("dimension", "the billiard map needs n = 2");
  SectionPoint sp;
  sp.q = a.q;
  sp.p = a.p;
  sp.sheet = a.sheet;
  sp.h = ctx.energy;
  const BilliardOrbit orb = billiard_orbit(d, sp, a.bounces, ctx.bopts);
  Table t;
  t.columns = {"n", "q", "p", "sheet", "dq", "flight_length"};
  for (std::size_t i = 0; i < orb.points.size(); ++i) {
    const SectionPoint& s = orb.points[i];
    const bool has = i > 0;
    t.add({static_cast<double>(i), s.q, s.p, static_cast<double>(s.sheet), has ? orb.dq[i - 1] : 0.0,
           has ? orb.flight_lengths[i - 1] : 0.0});
  }
  const std::string file = write_table(t, ctx.out, "bounces", ctx.format);
  json j = {{"domain", d.name()}, {"bounces", file}, {"completed", orb.dq.size()}, {"trapped", orb.trapped}};
  if (orb.trapped) j["message"] = orb.message;
  if (!orb.dq.empty()) {
    const Eigen::Matrix2d J = jacobian(d, sp, 1e-5, ctx.bopts);
    j["jacobian"] = {{J(0, 0), J(0, 1)}, {J(1, 0), J(1, 1)}};
    j["det_minus_one"] = J.determinant() - 1.0;
    j["reversibility_defect"] = reversibility_defect(d, sp, ctx.bopts);
  }
  write_json(j, ctx.out / "symplecticity.json");
  if (orb.trapped) {
    std::cerr << "error: " << orb.message << "\n";
    return 1;
  }
  return 0;
}

// ---- normalform

struct NormalFormArgs {
  std::vector<double> p_list = {4, 8, 16, 32};
  int samples = 16;
  double q0 = 0.0;
  double c_floor = 1.0;
  bool skip_drift = false;
};

int cmd_normalform(const Context& ctx, const NormalFormArgs& a) {
  const Domain& d = *ctx.domain;
  JetOptions jo;
  jo.jitter_seed = ctx.seed;
  const NormalFormData nf = estimate_boundary_jets(d, jo);
  write_json(to_json(nf), ctx.out / "jets.json");
  BilliardOptions bo = ctx.bopts;
  std::vector<double> ps;
  for (double p : a.p_list) ps.push_back(p / std::sqrt(ctx.energy));  // work on the h = 1 level
  const ComparisonTable cmp = compare_T_vs_N(d, nf, ps, a.samples, bo);
  Table t;
  t.columns = {"p", "q_error", "p_error"};
  for (const auto& r : cmp.rows) t.add({r.p, r.q_error, r.p_error});
  const std::string file = write_table(t, ctx.out, "comparison", ctx.format);
  json j = to_json(cmp);
  j["comparison"] = file;
  if (!a.skip_drift) {
    json drift = json::array();
    std::vector<double> pd, dd;
    for (double p : ps) {
      SectionPoint sp;
      sp.q = a.q0;
      sp.p = p;
      const int m = static_cast<int>(std::floor(a.c_floor * p * p));
      const double v = adiabatic_drift(d, nf, sp, m, bo, {a.c_floor});
      drift.push_back({{"p", p}, {"bounces", m}, {"drift", v}});
      pd.push_back(p);
      dd.push_back(v);
    }
    j["adiabatic"] = drift;
    if (pd.size() >= 2) j["adiabatic_slope"] = number(loglog_slope(pd, dd));
  }
  write_json(j, ctx.out / "slopes.json");
  return 0;
}

// ---- caustics

struct CausticArgs {
  std::vector<double> eps_list = {0.1};
  int orbit_len = 1000;
  int points = 128;
  double q0 = 0.0;
};

int cmd_caustics(const Context& ctx, const CausticArgs& a) {
  const Domain& d = *ctx.domain;
  JetOptions jo;
  jo.jitter_seed = ctx.seed;
  const NormalFormData nf = estimate_boundary_jets(d, jo);
  json fits = json::array();
  FitOptions fo;
  fo.q0 = a.q0;
  for (std::size_t i = 0; i < a.eps_list.size(); ++i) {
    const double eps = a.eps_list[i];
    json entry;
    try {
      const InvariantCircleFit fit = fit_invariant_circle(d, nf, eps, a.orbit_len, ctx.bopts, fo);
      entry = to_json(fit);
      const ActionVariables av = action_variables(d, fit, ctx.bopts);
      entry["I1"] = av.I1;
      entry["I2"] = av.I2;
    } catch (const ResonanceError& e) {
      entry = {{"epsilon", eps}, {"resonant", true}, {"message", e.what()}};
    }
    const auto curve = caustic_curve(d, eps, a.points, 1e-12);
    Table t;
    t.columns = {"q", "x1", "x2"};
    for (const auto& c : curve) t.add({c.q, c.x[0], c.x[1]});
    entry["caustic"] = write_table(t, ctx.out, "caustic_" + std::to_string(i), ctx.format);
    fits.push_back(entry);
  }
  write_json({{"domain", d.name()}, {"fits", fits}}, ctx.out / "fits.json");
  return 0;
}

// ---- twoperiodic

struct TwoPeriodicArgs {
  std::optional<double> q1, q2;
  double tol = 1e-9;
};

int cmd_twoperiodic(const Context& ctx, const TwoPeriodicArgs& a) {
  const Domain& d = *ctx.domain;
  if (!d.has_boundary()) throw ConfigError("dimension", "the billiard map needs n = 2");
  const double q1 = a.q1.value_or(0.0);
  const double q2 = a.q2.value_or(q1 + 0.5 * d.length());
  const TwoPeriodicResult r = find_two_periodic(d, q1, q2, a.tol, ctx.bopts);
  Table t;
  t.columns = {"n", "q", "p", "sheet"};
  for (std::size_t i = 0; i < r.orbit.points.size(); ++i) {
    const SectionPoint& s = r.orbit.points[i];
    t.add({static_cast<double>(i), s.q, s.p, static_cast<double>(s.sheet)});
  }
  const std::string file = write_table(t, ctx.out, "orbit", ctx.format);
  write_json({{"domain", d.name()},
              {"q1", r.q1},
              {"q2", r.q2},
              {"residual", r.residual},
              {"iterations", r.iterations},
              {"orbit", file}},
             ctx.out / "twoperiodic.json");
  return 0;
}

// ---- check

struct CheckArgs {
  std::vector<double> x, p;
  std::optional<double> t_end;
};

int cmd_check(const Context& ctx, const CheckArgs& a) {
  const Domain& d = *ctx.domain;
  const int n = d.dim();
  const bool rot = d.flags().so_invariant;
  const bool sep = !d.flags().separable.empty();
  if (!rot && !sep) throw Error("domain has neither the so_invariant nor the separable flag");
  Vec x, p;
  if (!a.x.empty()) {
    x = to_vec(a.x, n, "start.x");
    p = to_vec(a.p, n, "start.p");
  } else if (ctx.seed) {
    std::mt19937_64 rng(*ctx.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    x = Vec(n);
    p = Vec(n);
    do {
      for (int i = 0; i < n; ++i) x[i] = 0.5 * u(rng);
    } while (!(d.phi(x) > d.collar_threshold()));
    for (int i = 0; i < n; ++i) p[i] = u(rng);
  } else {
    x = Vec::Zero(n);
    p = Vec::Zero(n);
    x[0] = 0.2;
    if (n > 1) x[1] = 0.1;
    p[0] = 0.7;
    if (n > 1) p[1] = 1.3;
  }
  if (!(d.phi(x) > 0.0)) throw ConfigError("start.x", "start point must satisfy phi > 0");
  p = at_energy(d, x, p, ctx.energy);
  FlowOptions fo;
  fo.tol = ctx.bopts.tol;
  fo.t_end = a.t_end.value_or(rot ? 100.0 : 50.0);
  const Trajectory tr = integrate(d, make_interior(d, x, p), fo);
  json j = {{"domain", d.name()},
            {"t_end", fo.t_end},
            {"x0", vec_of(x)},
            {"p0", vec_of(p)},
            {"max_rel_energy_drift", tr.max_rel_drift},
            {"samples", tr.samples.size()}};
  if (rot) j["noether_drift"] = noether_drift(d, tr);
  if (sep) {
    const LiouvilleReport r = liouville_integral_drift(d, tr);
    j["liouville"] = {{"drift", r.drift},
                      {"used", r.used},
                      {"skipped_collar", r.skipped_collar},
                      {"skipped_corner", r.skipped_corner},
                      {"corner_proximity", r.corner_proximity}};
  }
  write_json(j, ctx.out / "check.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Billiards of degenerate metrics: regularized geodesic flow, billiard map, normal forms"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  auto* cfg_opt = app.add_option("--config", c.config, "domain config JSON file");
  auto* preset_opt = app.add_option("--preset", c.preset, "built-in preset")
                         ->check(CLI::IsMember(preset_names()));
  cfg_opt->excludes(preset_opt);
  app.add_option("--energy", c.energy, "energy level H (default 1)");
  app.add_option("--tol", c.tol, "integrator tolerance");
  app.add_option("--max-time", c.max_time, "maximum flight time");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", c.workers, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);

  SimArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "integrate the regularized flow");
  s_sim->add_option("--x", sim.x, "interior start point")->delimiter(',');
  s_sim->add_option("--p", sim.p, "interior start covector")->delimiter(',');
  s_sim->add_option("--q", sim.q, "section start: boundary arclength");
  s_sim->add_option("--ps", sim.ps, "section start: tangential momentum");
  s_sim->add_option("--sheet", sim.sheet, "sheet of the double cover (+1 or -1)");
  s_sim->add_option("--t-end", sim.t_end, "final time");
  s_sim->add_option("--dt", sim.dt, "uniform output spacing (default: every step)");

  BilliardArgs bil;
  auto* s_bil = app.add_subcommand("billiard", "iterate the billiard map");
  s_bil->add_option("--q", bil.q, "boundary arclength");
  s_bil->add_option("--p", bil.p, "tangential momentum");
  s_bil->add_option("--bounces", bil.bounces, "number of bounces")->check(CLI::PositiveNumber);
  s_bil->add_option("--sheet", bil.sheet, "sheet of the double cover");

  NormalFormArgs nfa;
  auto* s_nf = app.add_subcommand("normalform", "boundary jets and the averaged normal form");
  s_nf->add_option("--p-list", nfa.p_list, "momenta")->delimiter(',');
  s_nf->add_option("--samples", nfa.samples, "q samples per momentum")->check(CLI::PositiveNumber);
  s_nf->add_option("--q0", nfa.q0, "start of the adiabatic runs");
  s_nf->add_option("--c-floor", nfa.c_floor, "bounces = c_floor * p^2");
  s_nf->add_flag("--skip-drift", nfa.skip_drift, "skip the adiabatic drift runs");

  CausticArgs ca;
  auto* s_ca = app.add_subcommand("caustics", "invariant circle fits and caustics");
  s_ca->add_option("--eps-list", ca.eps_list, "epsilon values")->delimiter(',');
  s_ca->add_option("--orbit-len", ca.orbit_len, "bounces per fit")->check(CLI::PositiveNumber);
  s_ca->add_option("--points", ca.points, "caustic polyline points")->check(CLI::PositiveNumber);
  s_ca->add_option("--q0", ca.q0, "launch point");

  TwoPeriodicArgs tp;
  auto* s_tp = app.add_subcommand("twoperiodic", "two-periodic orbit by shooting");
  s_tp->add_option("--q1", tp.q1, "first guess");
  s_tp->add_option("--q2", tp.q2, "second guess (default q1 + L/2)");
  s_tp->add_option("--residual-tol", tp.tol, "residual tolerance");

  CheckArgs ck;
  auto* s_ck = app.add_subcommand("check", "Noether and Liouville integrals");
  s_ck->add_option("--x", ck.x, "start point")->delimiter(',');
  s_ck->add_option("--p", ck.p, "start covector")->delimiter(',');
  s_ck->add_option("--t-end", ck.t_end, "final time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const Context ctx = make_context(c);
    if (*s_sim) return cmd_simulate(ctx, sim);
    if (*s_bil) return cmd_billiard(ctx, bil);
    if (*s_nf) return cmd_normalform(ctx, nfa);
    if (*s_ca) return cmd_caustics(ctx, ca);
    if (*s_tp) return cmd_twoperiodic(ctx, tp);
    if (*s_ck) return cmd_check(ctx, ck);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
