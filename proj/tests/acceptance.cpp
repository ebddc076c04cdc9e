#include <algorithm>
#include <array>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "caplab/capacity.hpp"
#include "caplab/fraenkel.hpp"
#include "caplab/parallel.hpp"
#include "caplab/pipeline.hpp"
#include "fraenkel_oracle.hpp"

using namespace caplab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  try {
    report(id, name, body());
  } catch (const std::exception& e) {
    report(id, name, {false, std::string("exception: ") + e.what()});
  }
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ImplicitDomain ball(double r) { return make_star_domain([r](const Vec3&) { return r; }, Vec3::Zero()); }

ImplicitDomain ellipsoid(double a) {
  return make_star_domain(ellipsoid_graph(Vec3(a, 1.0, 1.0)), Vec3::Zero());
}

struct CapacityRun {
  CapacityResult capacity;
  std::vector<double> spreads;
  std::vector<std::size_t> levels;
};

CapacityRun capacity_pair(const ImplicitDomain& dom, GridResolution res) {
  CapacityRun out;
  std::array<ShellFit, 2> fits;
  const double rb = dom.bounding_radius();
  for (int k = 0; k < 2; ++k) {
    auto g = std::make_shared<const AnnularGrid>(build_grid(dom, (k ? 64.0 : 32.0) * rb, res));
    PotentialField p = solve_annulus(g, 1.0, {});
    compute_flux_table(p);
    const PotentialField n = normalize_to_log_growth(p);
    fits[k] = fit_far_field(n);
    out.spreads.push_back(flux_spread(n));
    out.levels.push_back(n.flux_table.size());
  }
  out.capacity = combine_truncation_pair(fits[0], fits[1]);
  return out;
}

std::string scenario_json(const std::string& label, const std::string& domain,
                          const std::string& factor) {
  return R"({"label":")" + label + R"(","domain":)" + domain + R"(,"factor":)" + factor + "}";
}

RunConfig config_for(const std::string& scenario, const fs::path& out) {
  RunConfig c = parse_run_config_json(R"({"scenario":)" + scenario + "}", ".");
  c.resolution = {64, 24, 48};
  c.synthesis.resolution = {64, 24, 48};
  c.output_dir = out.string();
  c.deterministic = true;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Flux tables of every converged scenario, for criterion 3.
struct FluxRecord {
  std::string label;
  double spread;
  std::size_t levels;
};
std::vector<FluxRecord> flux_records;

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
  fs::create_directories(root);
  const auto suite_start = Clock::now();

  // 1. Ball capacity with refinement
  criterion(1, "ball capacity oracle", [] {
    const auto t0 = Clock::now();
    const CapacityRun fine = capacity_pair(ball(1.0), {64, 24, 48});
    const double t_fine = seconds_since(t0);
    const CapacityRun coarse = capacity_pair(ball(1.0), {32, 12, 24});
    for (int k = 0; k < 2; ++k) flux_records.push_back({"B1 64x24x48", fine.spreads[k], fine.levels[k]});
    const double e_fine = std::abs(fine.capacity.capacity - 1.0);
    const double e_coarse = std::abs(coarse.capacity.capacity - 1.0);
    const double gain = e_coarse / std::max(e_fine, 1e-300);
    const bool ok = e_fine <= 0.02 && t_fine <= 180.0 && gain >= 2.0;
    return Outcome{ok, fmt("c = %.8f (err %.2e, %.1f s), coarse err %.2e, refinement gain %.1fx",
                           fine.capacity.capacity, e_fine, t_fine, e_coarse, gain)};
  });

  // 2. Annulus relative capacities
  criterion(2, "annulus relative capacity", [] {
    std::string detail;
    bool ok = true;
    const double e = std::exp(1.0);
    struct Case {
      double r_out, expected;
      const char* name;
    };
    for (const Case& c : {Case{e, kFourPi, "R=e"}, Case{e * e, kPi, "R=e^2"}}) {
      const auto t0 = Clock::now();
      auto g = std::make_shared<const AnnularGrid>(build_grid(ball(1.0), c.r_out, {64, 24, 48}));
      const PotentialField p = solve_annulus(g, 1.0, {});
      const double cap = relative_capacity(p);
      const double dt = seconds_since(t0);
      const double rel = std::abs(cap / c.expected - 1.0);
      ok = ok && rel <= 0.02 && dt <= 60.0;
      detail += fmt("%s: %.6f vs %.6f (rel %.2e, %.1f s, eps %.1e) ", c.name, cap, c.expected, rel,
                    dt, p.epsilon);
    }
    return Outcome{ok, detail};
  });

  // Schwarzschild m = 2 through the full pipeline (criteria 3, 4, 6, 7).
  RunResult schw;
  bool have_schw = false;
  double schw_seconds = 0.0;
  std::string schw_error;
  try {
    const auto t0 = Clock::now();
    schw = run_scenario(config_for(
        scenario_json("schwarzschild m=2", R"({"ball":{"radius":1}})", R"({"schwarzschild_m":2})"),
        root / "schwarzschild"));
    schw_seconds = seconds_since(t0);
    have_schw = true;
    flux_records.push_back({"schwarzschild", schw.flux_spread, schw.flux_table.size()});
  } catch (const std::exception& e) {
    schw_error = e.what();
  }

  // Ellipsoid family with synthesized minimal-boundary factors (criteria 5, 7, 9).
  const std::vector<double> deltas = {0.4, 0.3, 0.2, 0.1, 0.05};
  std::vector<RunResult> family;
  std::vector<std::string> family_dirs;
  std::string family_error;
  try {
    for (double d : deltas) {
      const double a = 1.0 + d;
      const std::string label = fmt("ellipsoid %.2fx1x1", a);
      const fs::path dir = root / fmt("ellipsoid_%03d", static_cast<int>(std::lround(d * 100)));
      const auto t0 = Clock::now();
      family.push_back(run_scenario(config_for(
          scenario_json(label, fmt(R"({"ellipsoid":{"semi_axes":[%.17g,1,1]}})", a),
                        R"({"synthesize_minimal":true})"),
          dir)));
      family_dirs.push_back(dir.string());
      const RunResult& r = family.back();
      flux_records.push_back({label, r.flux_spread, r.flux_table.size()});
      std::printf("       %s: c %.7f m %.7f ratio %.6f penrose %.6f eta %.3e alpha %.4f (%.1f s)\n",
                  label.c_str(), r.capacity.capacity, r.mass.m_adm, r.mass.ratio,
                  r.mass.penrose_ratio, r.mass.eta, r.mass.alpha, seconds_since(t0));
      std::fflush(stdout);
    }
  } catch (const std::exception& e) {
    family_error = e.what();
  }

  // 3. Flux constancy on every converged scenario
  criterion(3, "flux constancy", [&] {
    bool ok = !flux_records.empty() && family_error.empty();
    double worst = 0.0;
    std::size_t fewest = 1000;
    for (const FluxRecord& f : flux_records) {
      worst = std::max(worst, f.spread);
      fewest = std::min(fewest, f.levels);
      ok = ok && f.spread <= 0.02 && f.levels >= 10;
    }
    return Outcome{ok, fmt("%zu potentials, worst spread %.2e, fewest levels %zu%s",
                           flux_records.size(), worst, fewest,
                           family_error.empty() ? "" : (" (family failed: " + family_error + ")").c_str())};
  });

  // 4. Schwarzschild end to end
  criterion(4, "Schwarzschild end-to-end", [&] {
    if (!have_schw) return Outcome{false, "run failed: " + schw_error};
    const double c_err = std::abs(schw.capacity.capacity - 1.0);
    const double m_err = std::abs(schw.mass.m_adm / 2.0 - 1.0);
    double u_dev = 0.0, q_dev = 0.0, mh_dev = 0.0, t_top = 0.0;
    int n_u = 0;
    for (std::size_t i = 0; i < schw.series.samples.size(); ++i) {
      const MonotoneSample& s = schw.series.samples[i];
      t_top = std::max(t_top, s.t);
      if (s.t >= 0.2) {
        u_dev = std::max(u_dev, std::abs(s.U - schw.series.model_U[i]) / kEightPi);
        ++n_u;
      }
      q_dev = std::max(q_dev, std::abs(s.Q / kSixteenPi - 1.0));
      mh_dev = std::max(mh_dev, std::abs(s.hawking_mass / 2.0 - 1.0));
    }
    const double r_dev = std::abs(schw.mass.ratio - 1.0);
    const bool ok = c_err <= 0.02 && m_err <= 0.01 && n_u >= 10 && u_dev <= 0.03 && q_dev <= 0.03 &&
                    mh_dev <= 0.03 && r_dev <= 0.02 && schw_seconds <= 600.0;
    return Outcome{ok, fmt("c err %.2e, m %.6f, max|U-Us|/8pi %.2e (%d levels, t <= %.2f), "
                           "max|Q/16pi-1| %.2e, max|mH/2-1| %.2e, ratio %.6f, %.1f s",
                           c_err, schw.mass.m_adm, u_dev, n_u, t_top, q_dev, mh_dev,
                           schw.mass.ratio, schw_seconds)};
  });

  // 5. Monotonicity on three non-round admissible scenarios
  criterion(5, "monotonicity suite", [&] {
    if (!family_error.empty()) return Outcome{false, "family failed: " + family_error};
    bool ok = true;
    std::string detail;
    int used = 0;
    // the middle members 1.3, 1.2, 1.1
    for (std::size_t i = 1; i + 1 < family.size(); ++i) {
      const RunResult& r = family[i];
      ++used;
      if (!r.monotonicity) {
        ok = false;
        detail += r.label + ": " + r.monotonicity_error + "; ";
        continue;
      }
      const MonotonicityReport& m = *r.monotonicity;
      const bool pass = r.admissibility.admissible() && m.q_monotone.pass && m.u_bound.pass &&
                        m.ode.pass;
      ok = ok && pass;
      detail += fmt("%s: admissible %d, Q margin %+.3f, U margin %+.3f, ODE margin %+.3f (%d pts); ",
                    r.label.c_str(), r.admissibility.admissible(), m.q_monotone.margin,
                    m.u_bound.margin, m.ode.margin, m.unflagged);
    }
    return Outcome{ok && used == 3, detail};
  });

  // 6. Gauss-Bonnet on every single-component surface
  criterion(6, "Gauss-Bonnet", [&] {
    int checked = 0;
    double worst = 0.0;
    auto scan = [&](const RunResult& r) {
      for (const MonotoneSample& s : r.series.samples) {
        if (s.components != 1) continue;
        ++checked;
        worst = std::max(worst, std::abs(s.gauss_curvature_integral / kFourPi - 1.0));
      }
    };
    if (have_schw) scan(schw);
    for (const RunResult& r : family) scan(r);
    return Outcome{checked > 0 && worst <= 0.02,
                   fmt("%d surfaces, max |int K / 4pi - 1| = %.2e", checked, worst)};
  });

  // 7. Theorem verdicts
  criterion(7, "theorem verdicts", [&] {
    bool ok = have_schw && family_error.empty();
    std::string detail;
    auto check = [&](const RunResult& r, bool non_round) {
      const bool adm = r.admissibility.admissible();
      const bool pass = r.verdicts.mass_capacity.pass && r.verdicts.volumetric_penrose.pass;
      if (adm) ok = ok && pass;
      if (non_round && adm) ok = ok && r.verdicts.strict;
      if (!adm) ok = false;  // every scenario in this set is meant to be admissible
      detail += fmt("%s: ratio %.5f penrose %.5f%s; ", r.label.c_str(), r.mass.ratio,
                    r.mass.penrose_ratio, non_round ? (r.verdicts.strict ? " strict" : " NOT strict") : "");
    };
    if (have_schw) check(schw, false);
    for (const RunResult& r : family) check(r, true);
    return Outcome{ok, detail};
  });

  // 8. Fraenkel asymmetry
  criterion(8, "Fraenkel asymmetry", [] {
    const double a_ball = fraenkel_asymmetry(ball(1.0)).alpha;
    const ImplicitDomain ell = ellipsoid(1.2);
    const double a_ell = fraenkel_asymmetry(ell).alpha;
    const double oracle = oracle::brute_force_alpha(Vec3(1.2, 1.0, 1.0), 0.2, 9, 100);
    const double a_scaled = fraenkel_asymmetry(ell.scaled(3.0)).alpha;
    const double a_moved = fraenkel_asymmetry(ell.translated(Vec3(2.0, -1.5, 0.7))).alpha;
    const bool ok = a_ball <= 0.005 && std::abs(a_ell - oracle) <= 0.01 &&
                    std::abs(a_scaled - a_ell) <= 0.005 && std::abs(a_moved - a_ell) <= 0.005;
    return Outcome{ok, fmt("ball %.4f, ellipsoid %.4f vs brute force %.4f, scaled %.4f, "
                           "translated %.4f",
                           a_ball, a_ell, oracle, a_scaled, a_moved)};
  });

  // 9. Stability trend across the family
  criterion(9, "stability trend", [&] {
    if (!family_error.empty() || family.size() != deltas.size())
      return Outcome{false, "family failed: " + family_error};
    bool ok = true;
    for (std::size_t i = 1; i < family.size(); ++i)
      ok = ok && family[i].mass.eta < family[i - 1].mass.eta &&
           family[i].mass.alpha < family[i - 1].mass.alpha;
    const LedgerSummary s = write_ledger(family_dirs, (root / "eta_alpha.csv").string());
    std::string detail;
    for (const RunResult& r : family) {
      const double ratio = r.mass.eta > 0.0 ? r.mass.alpha / std::sqrt(r.mass.eta) : NAN;
      ok = ok && std::isfinite(ratio);
      detail += fmt("(%.2e, %.4f, %.3f) ", r.mass.eta, r.mass.alpha, ratio);
    }
    if (s.fitted_constant)
      detail += fmt("fitted alpha/sqrt(eta) = %.4f, max %.4f", *s.fitted_constant, *s.max_ratio);
    return Outcome{ok && s.fitted_constant.has_value(), "(eta, alpha, ratio): " + detail};
  });

  // 10. Determinism, including a different worker count
  criterion(10, "determinism", [&] {
    const std::string sc = scenario_json("ellipsoid 1.2x1x1", R"({"ellipsoid":{"semi_axes":[1.2,1,1]}})",
                                         R"({"synthesize_minimal":true})");
    const int threads = thread_count();
    std::vector<fs::path> dirs;
    for (int k = 0; k < 3; ++k) {
      RunConfig c = config_for(sc, root / fmt("determinism_%d", k));
      c.resolution = {32, 12, 24};
      c.synthesis.resolution = {32, 12, 24};
      c.level_count = 12;
      set_thread_count(k == 2 ? std::max(1, threads == 1 ? 3 : 1) : threads);
      run_scenario(c);
      dirs.push_back(c.output_dir);
    }
    set_thread_count(threads);
    bool ok = true;
    int files = 0;
    for (const char* f : {"capacity.json", "verdicts.json", "series.csv", "stability.json",
                          "summary.txt"}) {
      const std::string ref = slurp(dirs[0] / f);
      ok = ok && !ref.empty();
      for (std::size_t k = 1; k < dirs.size(); ++k) ok = ok && slurp(dirs[k] / f) == ref;
      ++files;
    }
    return Outcome{ok, fmt("%d files x 3 runs byte-identical: %s", files, ok ? "yes" : "no")};
  });

  std::printf("acceptance: %d failure(s), %.1f s total\n", failures, seconds_since(suite_start));
  return failures ? 1 : 0;
}
