// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance 3 7        run only criteria 3 and 7
//
// Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "degenbill/config.hpp"
#include "degenbill/invariants.hpp"

using namespace degenbill;

namespace {

constexpr double kPi = std::numbers::pi;

// Frozen independent values (tests/oracles).
constexpr double kQuarticHalfLength = 2.9466131905567351961;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char b[128];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

std::string sci(double x) { return fmt("%.3e", x); }

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const Domain& preset(const std::string& name) {
  static std::map<std::string, std::shared_ptr<const Domain>> cache;
  auto& d = cache[name];
  if (!d) d = make_preset(name);
  return *d;
}

const NormalFormData& jets(const std::string& name) {
  static std::map<std::string, NormalFormData> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, estimate_boundary_jets(preset(name))).first;
  return it->second;
}

BilliardOptions bopts() {
  BilliardOptions o;
  o.tol = 1e-10;
  return o;
}

Outcome c1_flat_cylinder() {
  const Domain& d = preset("flat_cylinder");
  const Mat C = Mat::Identity(1, 1);
  double map_err = 0.0;
  for (double q : {0.0, 1.3, 2.6, 3.9, 5.2})
    for (double p : {1.0, 10.0 / 3.0, 17.0 / 3.0, 8.0}) {
      SectionPoint sp;
      sp.q = q;
      sp.p = p;
      const BounceResult r = billiard_step(d, sp, bopts());
      Vec qv(1), pv(1);
      qv << q;
      pv << p;
      const auto [qm, pm] = model_map(qv, pv, 1.0, C);
      map_err = std::max({map_err, std::abs(q + r.dq - qm[0]), std::abs(r.out.p - pm[0])});
    }
  // cycloid: the flight from the section starts at t = -pi / 2k
  double cyc_err = 0.0;
  for (double p : {1.0, 2.5, 6.0}) {
    const double k = p, q0 = 0.7;
    SectionPoint sp;
    sp.q = q0;
    sp.p = p;
    FlowOptions fo;
    fo.tol = 1e-10;
    fo.t_end = 0.999 * kPi / k;
    fo.record_samples = false;
    for (int j = 1; j <= 40; ++j) fo.output_times.push_back(fo.t_end * j / 40.0);
    const Trajectory tr = integrate(d, launch(d, sp), fo);
    Vec qv(1), pv(1);
    qv << q0 + 0.5 * kPi / (k * k);  // q at the top of the arch
    pv << p;
    for (const Sample& s : tr.outputs) {
      const CycloidState c = cycloid_state(s.t - 0.5 * kPi / k, qv, pv, 1.0, C);
      const Vec x = project_to_base(s.point);
      cyc_err = std::max({cyc_err, std::abs(x[0] - c.q[0]), std::abs(x[1] - c.s)});
    }
  }
  return {map_err <= 1e-7 && cyc_err <= 1e-8, "map err " + sci(map_err) + ", cycloid err " + sci(cyc_err)};
}

Outcome c2_energy() {
  struct Start {
    const char* name;
    Vec x, p;
  };
  const std::vector<Start> starts = {{"disk", v2(0.2, 0.1), v2(0.7, 1.3)},
                                     {"concave_quartic", v2(-0.3, 0.2), v2(1.0, 0.4)},
                                     {"separable_square", v2(0.2, 0.1), v2(0.7, 1.3)},
                                     {"flat_cylinder", v2(0.0, 0.5), v2(1.0, 1.0)}};
  double worst = 0.0;
  long switches = 0;
  std::string parts;
  for (const Start& s : starts) {
    const Domain& d = preset(s.name);
    PhasePoint pt = make_interior(d, s.x, s.p);
    pt.p *= 1.0 / std::sqrt(hamiltonian(d, pt));
    FlowOptions fo;
    fo.tol = 1e-10;
    fo.t_end = 100.0;
    fo.record_samples = false;
    const Trajectory tr = integrate(d, pt, fo);
    long sw = 0;
    for (const Event& e : tr.events) sw += e.type == Event::Type::Switch;
    switches += sw;
    worst = std::max(worst, tr.max_rel_drift);
    parts += std::string(parts.empty() ? "" : ", ") + s.name + " " + sci(tr.max_rel_drift) + " (" +
             std::to_string(sw) + " switches)";
  }
  return {worst <= 1e-9 && switches > 0, parts};
}

Outcome c3_symplectic() {
  double det_err = 0.0, rev = 0.0;
  std::string parts;
  for (const char* name : {"disk", "concave_quartic", "separable_square", "flat_cylinder"}) {
    const Domain& d = preset(name);
    const double L = d.length();
    double de = 0.0, re = 0.0;
    for (int i = 0; i < 4; ++i)
      for (double p : {2.0, 3.0, 4.5, 6.0}) {
        SectionPoint sp;
        sp.q = L * (i + 0.3) / 4.0;
        sp.p = p;
        const Eigen::Matrix2d J = jacobian(d, sp, 1e-5, bopts());
        de = std::max(de, std::abs(J.determinant() - 1.0));
        re = std::max(re, reversibility_defect(d, sp, bopts()));
      }
    det_err = std::max(det_err, de);
    rev = std::max(rev, re);
    parts += std::string(parts.empty() ? "" : ", ") + name + " det " + sci(de) + " rev " + sci(re);
  }
  return {det_err <= 1e-4 && rev <= 1e-6, parts};
}

Outcome c4_intercept() {
  double worst = 0.0;
  for (const char* name : {"disk", "concave_quartic"})
    for (double b : jets(name).b0_values) worst = std::max(worst, std::abs(b - 1.0));
  return {worst <= 1e-3, "max |B(q,0) - 1| = " + sci(worst)};
}

Outcome c5_disk_k() {
  double worst = 0.0;
  for (double k : jets("disk").k_values) worst = std::max(worst, std::abs(k - 4.0 / 3.0));
  return {worst <= 1e-2, "max |k - 4/3| = " + sci(worst)};
}

Outcome c6_orders() {
  const ComparisonTable disk = compare_T_vs_N(preset("disk"), jets("disk"), {4, 8, 16, 32}, 16, bopts());
  const ComparisonTable flat =
      compare_T_vs_N(preset("flat_cylinder"), jets("flat_cylinder"), {4, 8, 16, 32}, 16, bopts());
  double flat_err = 0.0;
  for (const auto& r : flat.rows) flat_err = std::max({flat_err, r.q_error, r.p_error});
  std::string rows;
  for (const auto& r : disk.rows) rows += " p=" + fmt("%g", r.p) + ":" + sci(r.q_error) + "/" + sci(r.p_error);
  const bool ok = disk.q_slope <= -3.3 && disk.p_slope <= -2.5 && flat_err <= 1e-9;
  return {ok, "disk q slope " + fmt("%.3f", disk.q_slope) + ", p slope " + fmt("%.3f", disk.p_slope) +
                  ", flat max err " + sci(flat_err) + "; q/p errors" + rows};
}

Outcome c7_adiabatic() {
  std::string parts;
  bool ok = true;
  for (const char* name : {"disk", "concave_quartic"}) {
    std::vector<double> ps = {4, 8, 16}, dr;
    for (double p : ps) {
      SectionPoint sp;
      sp.q = 0.3;
      sp.p = p;
      dr.push_back(adiabatic_drift(preset(name), jets(name), sp, static_cast<int>(p * p), bopts()));
    }
    const double s = loglog_slope(ps, dr);
    ok = ok && s <= -2.0;
    parts += std::string(parts.empty() ? "" : ", ") + name + " slope " + fmt("%.3f", s) + " (" + sci(dr[0]) +
             ".." + sci(dr[2]) + ")";
  }
  return {ok, parts};
}

Outcome c8_lazutkin() {
  const std::vector<double> es = {0.05, 0.07, 0.1, 0.14};
  std::vector<double> dev;
  for (double e : es) dev.push_back(fit_invariant_circle(preset("concave_quartic"), jets("concave_quartic"), e, 1000,
                                                         bopts())
                                        .deviation);
  const double s = loglog_slope(es, dev);
  const InvariantCircleFit disk = fit_invariant_circle(preset("disk"), jets("disk"), 0.1, 1000, bopts());
  double spread = 0.0;
  for (int k = 1; k <= disk.modes; ++k) spread = std::max({spread, std::abs(disk.a[k]), std::abs(disk.b[k])});
  const bool ok = s >= 4.3 && s <= 5.7 && disk.residual <= 1e-7;
  return {ok, "quartic slope " + fmt("%.3f", s) + " (dev " + sci(dev.front()) + ".." + sci(dev.back()) +
                  "), disk residual " + sci(disk.residual) + ", disk max |mode k>0| " + sci(spread)};
}

Outcome c9_actions() {
  const Domain& d = preset("disk");
  const InvariantCircleFit fit = fit_invariant_circle(d, jets("disk"), 0.1, 1000, bopts());
  const ActionVariables av = action_variables(d, fit, bopts());
  const double e = fit.epsilon_circle;
  const double L = 2.0 * kPi;
  const double target = L / e - 0.375 * e * (4.0 / 3.0) * L;
  const double r1 = av.I1 / (kPi * e);
  const double d2 = std::abs(av.I2 - target);
  return {std::abs(r1 - 1.0) <= 0.05 && d2 <= 5 * e * e * e,
          "circle eps " + fmt("%.6f", e) + ", I1/(pi eps) = " + fmt("%.6f", r1) + ", |I2 - target| = " + sci(d2) +
              " (bound " + sci(5 * e * e * e) + ")"};
}

Outcome c10_two_periodic() {
  const Domain& disk = preset("disk");
  const TwoPeriodicResult a = find_two_periodic(disk, 0.3, 0.3 + kPi + 0.2, 1e-10, bopts());
  const double dd = std::abs(std::abs(periodic_diff(a.q2, a.q1, disk.length())) - kPi);
  const Domain& quart = preset("concave_quartic");
  const double L = quart.length();
  const TwoPeriodicResult b = find_two_periodic(quart, 0.2, kQuarticHalfLength - 0.15, 1e-10, bopts());
  // frozen orbit: the long axis, q = 0 and q = L/2 in either order
  const double e1 = std::max(std::abs(periodic_diff(b.q1, 0.0, L)), std::abs(periodic_diff(b.q2, kQuarticHalfLength, L)));
  const double e2 = std::max(std::abs(periodic_diff(b.q2, 0.0, L)), std::abs(periodic_diff(b.q1, kQuarticHalfLength, L)));
  const double qe = std::min(e1, e2);
  return {dd <= 1e-6 && qe <= 1e-6, "disk |q' - q - pi| = " + sci(dd) + ", quartic distance to frozen orbit " + sci(qe)};
}

Outcome c11_integrable() {
  const Domain& disk = preset("disk");
  PhasePoint pt = make_interior(disk, v2(0.2, 0.1), v2(0.7, 1.3));
  pt.p *= 1.0 / std::sqrt(hamiltonian(disk, pt));
  FlowOptions fo;
  fo.tol = 1e-10;
  fo.t_end = 100.0;
  const double nd = noether_drift(disk, integrate(disk, pt, fo));
  const Domain& sq = preset("separable_square");
  PhasePoint ps = make_interior(sq, v2(0.2, 0.1), v2(0.7, 1.3));
  ps.p *= 1.0 / std::sqrt(hamiltonian(sq, ps));
  fo.t_end = 50.0;
  const LiouvilleReport lr = liouville_integral_drift(sq, integrate(sq, ps, fo));
  return {nd <= 1e-8 && lr.drift <= 1e-7 && lr.used > 100,
          "Noether drift " + sci(nd) + ", Liouville drift " + sci(lr.drift) + " over " + std::to_string(lr.used) +
              " interior samples"};
}

std::string slurp_dir(const std::filesystem::path& dir) {
  std::set<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files.insert(e.path());
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    all += f.filename().string() + "\n" + ss.str();
  }
  return all;
}

Outcome c12_determinism() {
  const std::string cli = DEGENBILL_CLI;
  const auto base = std::filesystem::temp_directory_path() / "degenbill_acceptance";
  std::filesystem::remove_all(base);
  const std::vector<std::string> cmds = {
      "--preset disk billiard --q 0.5 --p 3 --bounces 40",
      "--preset concave_quartic normalform --p-list 6,12 --samples 4 --skip-drift",
      "--preset flat_cylinder simulate --q 0.2 --ps 2 --t-end 3",
      "--preset disk caustics --eps-list 0.1 --orbit-len 120 --points 32",
  };
  bool same = true;
  int ran = 0;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    std::string out[2];
    for (int r = 0; r < 2; ++r) {
      const auto dir = base / (std::to_string(i) + "_" + std::to_string(r));
      const std::string workers = r == 0 ? " --workers 1" : " --workers 4";
      const std::string line = cli + " --out " + dir.string() + workers + " " + cmds[i] + " > /dev/null 2>&1";
      if (std::system(line.c_str()) != 0) return {false, "command failed: " + cmds[i]};
      out[r] = slurp_dir(dir);
    }
    same = same && !out[0].empty() && out[0] == out[1];
    ++ran;
  }
  std::filesystem::remove_all(base);
  return {same, std::to_string(ran) + " commands, outputs byte-identical across runs and worker counts: " +
                    (same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"flat-cylinder exactness", c1_flat_cylinder},
      {"energy conservation", c2_energy},
      {"symplecticity and reversibility", c3_symplectic},
      {"boundary metric intercept", c4_intercept},
      {"disk jet k = 4/3", c5_disk_k},
      {"normal-form orders", c6_orders},
      {"adiabatic invariance", c7_adiabatic},
      {"invariant circle expansion", c8_lazutkin},
      {"action variables", c9_actions},
      {"two-periodic orbits", c10_two_periodic},
      {"integrable cases", c11_integrable},
      {"CLI determinism", c12_determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
