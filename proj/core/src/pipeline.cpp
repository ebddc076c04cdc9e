#include "caplab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace caplab {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

const char* pass_fail(bool pass) { return pass ? "pass" : "fail"; }

ojson verdict_json(const Verdict& v) {
  return {{"result", pass_fail(v.pass)}, {"margin", v.margin}, {"checked", v.checked}};
}

std::string series_csv(const MonotoneSeries& s) {
  std::ostringstream out;
  out << "t,U,Q,area_euc,area_g,hawking_mass,ring_integral,flagged\n";
  for (const MonotoneSample& m : s.samples)
    out << num(m.t) << ',' << num(m.U) << ',' << num(m.Q) << ',' << num(m.area_euc) << ','
        << num(m.area_g) << ',' << num(m.hawking_mass) << ',' << num(m.ring_integral) << ','
        << (m.flagged ? 1 : 0) << '\n';
  return out.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

ojson read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open '" + path.string() + "'");
  try {
    return ojson::parse(in);
  } catch (const ojson::exception& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

std::string summary_text(const RunResult& r, const MetricScenario& sc) {
  std::ostringstream out;
  char buf[512];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out << buf << '\n';
  };
  line("scenario: %s", r.label.c_str());
  line("domain: volume %.8g, bounding radius %.6g, factor %s", r.mass.vol,
       sc.domain.bounding_radius(), sc.factor->kind().c_str());
  line("capacity: c = %.8g (a = %.8g, fit residual %.2e, R_out %.4g / %.4g)",
       r.capacity.capacity, r.capacity.a_hat, r.capacity.shell_fit_residual, r.r_out[0],
       r.r_out[1]);
  if (r.reference)
    line("reference: c = %.8g, capacity error %.3e, max |u - u_ref| = %.3e",
         r.reference->capacity, std::abs(r.capacity.capacity - r.reference->capacity),
         r.reference_potential_error);
  line("flux: relative spread %.3e over %zu levels", r.flux_spread, r.flux_table.size());
  line("ADM mass: %.8g (flux route), %.8g (coordinate route)", r.adm.m_flux, r.adm.m_coord);
  const TheoremVerdicts& v = r.verdicts;
  line("verdict mass-capacity inequality m_ADM >= 2c: %s, ratio %.6f, margin %+.6f",
       pass_fail(v.mass_capacity.pass), r.mass.ratio, v.mass_capacity.margin);
  line("verdict volumetric Penrose inequality m_ADM >= 2(3V/4pi)^(1/3): %s, ratio %.6f, "
       "margin %+.6f",
       pass_fail(v.volumetric_penrose.pass), r.mass.penrose_ratio, v.volumetric_penrose.margin);
  if (r.monotonicity) {
    const MonotonicityReport& m = *r.monotonicity;
    line("verdict Q monotonicity Q(t_i+1) >= Q(t_i): %s, margin %+.4e over %d pairs",
         pass_fail(m.q_monotone.pass), m.q_monotone.margin, m.q_monotone.checked);
    line("verdict U upper bound U <= 8pi(e^t-1)/(e^t+1): %s, margin %+.4e over %d samples",
         pass_fail(m.u_bound.pass), m.u_bound.margin, m.u_bound.checked);
    line("verdict U differential inequality U' + U^2/16pi <= 4pi: %s, margin %+.4e over %d "
         "samples",
         pass_fail(m.ode.pass), m.ode.margin, m.ode.checked);
  } else {
    line("monotonicity: not evaluated (%s)", r.monotonicity_error.c_str());
  }
  line("stability: eta %.6g, alpha %.6g, excess %.6g on [0, %.4g]%s", r.mass.eta, r.mass.alpha,
       r.excess.value, r.s_max, r.excess.low_confidence ? " (low confidence)" : "");
  line("admissibility: %s", r.admissibility.admissible() ? "admissible" : "NOT admissible");
  for (const std::string& w : r.warnings) line("warning: %s", w.c_str());
  return out.str();
}

}  // namespace

RunResult run_scenario(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioSpec spec = resolve_scenario(config);
  const ImplicitDomain domain = build_domain(spec);
  const double rb = domain.bounding_radius();
  RunResult r;
  r.label = spec.label;
  r.r_out = {config.r_out_factors[0] * rb, config.r_out_factors[1] * rb};
  const int big = r.r_out[1] > r.r_out[0] ? 1 : 0;
  const MetricScenario sc = build_scenario(spec, r.r_out[big], config.synthesis);
  r.admissibility = check_admissibility(sc);
  r.reference = sc.reference;

  PotentialField potential;
  for (int m = 0; m < 2; ++m) {
    auto grid = std::make_shared<const AnnularGrid>(build_grid(sc.domain, r.r_out[m], config.resolution));
    PotentialField p = solve_annulus(grid, 1.0, config.solver);
    r.picard_iterations += p.iterations;
    r.linear_iterations += p.linear_iterations;
    compute_flux_table(p, config.flux_levels);
    PotentialField n = normalize_to_log_growth(p);
    r.fits[m] = fit_far_field(n);
    if (m == big) potential = std::move(n);
  }
  r.capacity = combine_truncation_pair(r.fits[0], r.fits[1]);
  r.flux_table = potential.flux_table;
  r.flux_spread = flux_spread(potential);

  if (r.reference) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss;
    for (int q = 0; q < 1000; ++q) {
      const Vec3 w = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
      r.reference_boundary_max =
          std::max(r.reference_boundary_max, std::abs(r.reference->potential(domain.boundary_point(w))));
    }
    const AnnularGrid& g = *potential.grid;
    const auto& u = potential.values();
    for (std::size_t n = 0; n < u.size(); ++n)
      r.reference_potential_error =
          std::max(r.reference_potential_error,
                   std::abs(u[n] - r.reference->potential(g.position(static_cast<int>(n)))));
  }

  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);
  SeriesOptions so;
  so.count = config.level_count;
  so.t_min = config.t_min;
  so.max_fraction = config.max_fraction;
  int dumped = 0;
  if (config.dump_surfaces) {
    fs::create_directories(out_dir / "surfaces");
    so.on_surface = [&](const LevelSurface& s, const GMetricSurface& gq) {
      char name[32];
      std::snprintf(name, sizeof name, "level_%02d.off", dumped++);
      std::ofstream f(out_dir / "surfaces" / name, std::ios::binary);
      write_off(f, s, &gq);
    };
  }
  r.series = monotone_series(potential, *sc.factor, so);

  r.adm = adm_mass_flux(*sc.factor, domain.center(), r.r_out[big]);
  r.fraenkel = fraenkel_asymmetry(domain);
  r.mass = make_mass_report(r.adm.m_flux, r.adm.m_coord, r.capacity.capacity, domain.volume(),
                            r.fraenkel.alpha);
  r.verdicts = theorem_verdicts(r.mass);
  try {
    std::optional<double> bound;
    if (r.mass.m_adm > 0.0) bound = kEightPi * r.mass.m_adm / r.capacity.capacity;
    r.monotonicity = monotonicity_report(r.series, {}, bound);
  } catch (const Error& e) {
    r.monotonicity_error = e.what();
  }
  for (const MonotoneSample& s : r.series.samples)
    if (!s.flagged) r.s_max = std::max(r.s_max, s.t);
  r.excess = stability_excess(r.series, r.s_max);

  for (const std::string& w : r.admissibility.warnings) r.warnings.push_back("admissibility: " + w);
  if (r.capacity.low_confidence) r.warnings.push_back("capacity fit residual above threshold");
  if (r.capacity.truncation_dominated) r.warnings.push_back("capacity fit drifts across shells");
  if (r.adm.low_confidence) r.warnings.push_back("ADM sphere sequence not converged");
  int flagged = 0;
  for (const MonotoneSample& s : r.series.samples) flagged += s.flagged;
  if (flagged) r.warnings.push_back(std::to_string(flagged) + " level samples flagged");

  ojson cap = {{"a_hat", r.capacity.a_hat},
               {"capacity", r.capacity.capacity},
               {"residual", r.capacity.shell_fit_residual},
               {"R_out_pair", {r.r_out[0], r.r_out[1]}},
               {"a_pair", {r.fits[0].a, r.fits[1].a}},
               {"low_confidence", r.capacity.low_confidence},
               {"truncation_dominated", r.capacity.truncation_dominated},
               {"flux_spread", r.flux_spread},
               {"picard_iterations", r.picard_iterations},
               {"linear_iterations", r.linear_iterations}};
  if (r.reference) cap["reference_capacity"] = r.reference->capacity;
  write_text(out_dir / "capacity.json", cap.dump(2) + "\n");

  ojson ver = {{"m_adm", r.mass.m_adm},
               {"m_adm_coord", r.mass.m_adm_coord},
               {"capacity", r.mass.capacity},
               {"ratio", r.mass.ratio},
               {"vol", r.mass.vol},
               {"penrose_ratio", r.mass.penrose_ratio},
               {"eta", r.mass.eta},
               {"alpha", r.mass.alpha},
               {"verdicts",
                {{"mass_capacity", pass_fail(r.verdicts.mass_capacity.pass)},
                 {"volumetric_penrose", pass_fail(r.verdicts.volumetric_penrose.pass)}}},
               {"margins",
                {{"mass_capacity", r.verdicts.mass_capacity.margin},
                 {"volumetric_penrose", r.verdicts.volumetric_penrose.margin}}},
               {"admissible", r.admissibility.admissible()},
               {"max_abs_boundary_h_g", r.admissibility.max_abs_h_g}};
  if (r.monotonicity) {
    ver["monotonicity"] = {{"q_monotone", verdict_json(r.monotonicity->q_monotone)},
                           {"u_bound", verdict_json(r.monotonicity->u_bound)},
                           {"ode", verdict_json(r.monotonicity->ode)},
                           {"max_q_deviation", r.monotonicity->max_q_deviation}};
  }
  write_text(out_dir / "verdicts.json", ver.dump(2) + "\n");

  ojson stab = {{"label", r.label},
                {"eta", r.mass.eta},
                {"alpha", r.mass.alpha},
                {"ratio", r.mass.ratio},
                {"excess", r.excess.value}};
  write_text(out_dir / "stability.json", stab.dump(2) + "\n");
  write_text(out_dir / "series.csv", series_csv(r.series));

  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string summary = summary_text(r, sc);
  if (!config.deterministic) summary += "time: " + num(r.seconds) + " s\n";
  write_text(out_dir / "summary.txt", summary);
  return r;
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& config, int levels) {
  require(levels >= 2, "convergence study needs at least 2 refinement levels");
  std::vector<ConvergenceRow> rows;
  for (int l = 0; l < levels; ++l) {
    const int d = levels - 1 - l;
    const int f = 1 << d;
    GridResolution res{(config.resolution.ns - 1) / f + 1, config.resolution.ntheta / f,
                       config.resolution.nphi / f};
    if (res.ns < 8 || res.ntheta < 4 || res.nphi < 8 || res.nphi % 2)
      throw ScenarioError("convergence study: too many levels for the configured resolution");
    RunConfig c = config;
    c.resolution = res;
    c.synthesis.resolution = res;
    c.output_dir = (fs::path(config.output_dir) / ("level_" + std::to_string(l))).string();
    const RunResult r = run_scenario(c);
    ConvergenceRow row;
    row.level = l;
    row.resolution = res;
    row.nodes = static_cast<std::size_t>(res.ns) * res.ntheta * res.nphi + 2 * res.ns;
    row.capacity = r.capacity.capacity;
    if (r.reference) row.capacity_error = std::abs(r.capacity.capacity - r.reference->capacity);
    row.m_adm = r.mass.m_adm;
    if (r.monotonicity) {
      row.max_q_violation = r.monotonicity->max_q_decrease;
      row.q_deviation = r.monotonicity->max_q_deviation;
    }
    if (!rows.empty()) {
      const ConvergenceRow& p = rows.back();
      if (row.capacity_error && p.capacity_error && *row.capacity_error > 0.0)
        row.capacity_order = std::log2(*p.capacity_error / *row.capacity_error);
      if (row.q_deviation > 0.0 && p.q_deviation > 0.0)
        row.q_order = std::log2(p.q_deviation / row.q_deviation);
    }
    rows.push_back(row);
  }
  std::ostringstream out;
  out << "level,ns,ntheta,nphi,nodes,capacity,capacity_error,capacity_order,m_adm,"
         "max_q_violation,q_deviation,q_order\n";
  for (const ConvergenceRow& r : rows)
    out << r.level << ',' << r.resolution.ns << ',' << r.resolution.ntheta << ','
        << r.resolution.nphi << ',' << r.nodes << ',' << num(r.capacity) << ','
        << opt_num(r.capacity_error) << ',' << opt_num(r.capacity_order) << ',' << num(r.m_adm)
        << ',' << num(r.max_q_violation) << ',' << num(r.q_deviation) << ','
        << opt_num(r.q_order) << '\n';
  fs::create_directories(config.output_dir);
  write_text(fs::path(config.output_dir) / "convergence.csv", out.str());
  return rows;
}

void emit_plot_data(const std::string& run_dir) {
  const fs::path dir = run_dir;
  const auto rows = read_csv(dir / "series.csv");
  if (rows.empty()) throw ScenarioError("series.csv is empty");
  std::optional<double> bound;
  if (fs::exists(dir / "verdicts.json")) {
    const ojson v = read_json(dir / "verdicts.json");
    const double m = v.value("m_adm", 0.0), c = v.value("capacity", 0.0);
    if (m > 0.0 && c > 0.0) bound = kEightPi * m / c;
  }
  std::ostringstream pu, pq, pt;
  pu << "t,U,U_model,deviation_over_8pi,flagged\n";
  pq << "t,Q,Q_model,flagged\n";
  pt << "t,trend,bound,flagged\n";
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& c = rows[i];
    if (c.size() < 8) throw ScenarioError("series.csv: malformed row");
    const double t = std::stod(c[0]), u = std::stod(c[1]), q = std::stod(c[2]);
    const double model = schwarzschild_model_U(t);
    pu << num(t) << ',' << num(u) << ',' << num(model) << ',' << num((u - model) / kEightPi)
       << ',' << c[7] << '\n';
    pq << num(t) << ',' << num(q) << ',' << num(kSixteenPi) << ',' << c[7] << '\n';
    if (t > 0.0)
      pt << num(t) << ',' << num(std::exp(t) * (kEightPi - u)) << ',' << opt_num(bound) << ','
         << c[7] << '\n';
  }
  write_text(dir / "plot_U.csv", pu.str());
  write_text(dir / "plot_Q.csv", pq.str());
  write_text(dir / "plot_trend.csv", pt.str());
}

LedgerSummary write_ledger(const std::vector<std::string>& run_dirs, const std::string& out_path) {
  LedgerSummary s;
  std::ostringstream out;
  out << "label,eta,alpha,alpha_over_sqrt_eta\n";
  double num_c = 0.0, den_c = 0.0;
  for (const std::string& d : run_dirs) {
    const ojson j = read_json(fs::path(d) / "stability.json");
    const double eta = j.value("eta", 0.0), alpha = j.value("alpha", 0.0);
    std::optional<double> ratio;
    if (eta > 0.0) {
      ratio = alpha / std::sqrt(eta);
      s.max_ratio = s.max_ratio ? std::max(*s.max_ratio, *ratio) : *ratio;
      num_c += alpha * std::sqrt(eta);
      den_c += eta;
    }
    std::string label = j.value("label", std::string());
    for (char& ch : label)
      if (ch == ',') ch = ';';
    out << label << ',' << num(eta) << ',' << num(alpha) << ',' << opt_num(ratio) << '\n';
    ++s.records;
  }
  if (den_c > 0.0) s.fitted_constant = num_c / den_c;
  const fs::path p = out_path;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_text(p, out.str());
  return s;
}

}  // namespace caplab
