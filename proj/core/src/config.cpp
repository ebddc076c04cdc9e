#include "caplab/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace caplab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string(what) + ": " + e.what());
  }
}

double positive(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ScenarioError(std::string("expected a number for '") + key + "'");
  const double v = j[key].get<double>();
  if (!(v > 0.0)) throw ScenarioError(std::string("'") + key + "' must be positive");
  return v;
}

Vec3 vec3(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 3)
    throw ScenarioError(std::string("'") + key + "' must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ScenarioSpec scenario_from_json(const json& j) {
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  ScenarioSpec s;
  s.label = j.value("label", std::string("scenario"));
  if (!j.contains("domain") || !j["domain"].is_object())
    throw ScenarioError("scenario needs a 'domain' object");
  const json& d = j["domain"];
  if (d.contains("ball")) {
    s.domain = DomainKind::Ball;
    s.radius = positive(d["ball"], "radius");
  } else if (d.contains("star")) {
    const json& st = d["star"];
    s.domain = DomainKind::Star;
    if (!st.contains("l_max") || !st["l_max"].is_number_integer() || st["l_max"].get<int>() < 0)
      throw ScenarioError("star domain needs a non-negative integer 'l_max'");
    s.l_max = st["l_max"].get<int>();
    if (!st.contains("coeffs") || !st["coeffs"].is_array())
      throw ScenarioError("star domain needs a 'coeffs' array");
    for (const json& c : st["coeffs"]) {
      if (!c.is_number()) throw ScenarioError("star coefficients must be numbers");
      s.coeffs.push_back(c.get<double>());
    }
    s.base_radius = st.value("base_radius", 0.0);
  } else if (d.contains("ellipsoid")) {
    s.domain = DomainKind::Ellipsoid;
    if (!d["ellipsoid"].contains("semi_axes"))
      throw ScenarioError("ellipsoid domain needs 'semi_axes'");
    s.semi_axes = vec3(d["ellipsoid"]["semi_axes"], "semi_axes");
    if (!(s.semi_axes.minCoeff() > 0.0)) throw ScenarioError("semi-axes must be positive");
  } else {
    throw ScenarioError("domain must be one of 'ball', 'star', 'ellipsoid'");
  }
  if (j.contains("center")) s.center = vec3(j["center"], "center");

  if (!j.contains("factor") || !j["factor"].is_object())
    throw ScenarioError("scenario needs a 'factor' object");
  const json& f = j["factor"];
  if (f.contains("schwarzschild_m")) {
    s.factor = FactorKind::Schwarzschild;
    s.factor_value = positive(f, "schwarzschild_m");
  } else if (f.contains("synthesize_minimal")) {
    if (!f["synthesize_minimal"].is_boolean() || !f["synthesize_minimal"].get<bool>())
      throw ScenarioError("'synthesize_minimal' must be true");
    s.factor = FactorKind::Synthesize;
  } else if (f.contains("constant")) {
    s.factor = FactorKind::Constant;
    s.factor_value = positive(f, "constant");
  } else {
    throw ScenarioError("factor must be one of 'schwarzschild_m', 'synthesize_minimal', 'constant'");
  }
  if (f.contains("scale")) s.factor_scale = positive(f, "scale");
  return s;
}

GridResolution resolution_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ScenarioError("resolution must be [ns, ntheta, nphi]");
  GridResolution r{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
  if (r.ns < 4 || r.ntheta < 2 || r.nphi < 4 || r.nphi % 2)
    throw ScenarioError("resolution needs ns >= 4, ntheta >= 2 and an even nphi >= 4");
  return r;
}

}  // namespace

ScenarioSpec parse_scenario_json(const std::string& text) {
  try {
    return scenario_from_json(parse(text, "scenario"));
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
}

ScenarioSpec load_scenario(const std::string& path) { return parse_scenario_json(read_file(path)); }

ImplicitDomain build_domain(const ScenarioSpec& spec) {
  switch (spec.domain) {
    case DomainKind::Ball: {
      const double r = spec.radius;
      return make_star_domain([r](const Vec3&) { return r; }, spec.center);
    }
    case DomainKind::Star:
      return make_star_domain(spherical_harmonic_graph(spec.l_max, spec.coeffs, spec.base_radius),
                              spec.center);
    case DomainKind::Ellipsoid:
      return make_star_domain(ellipsoid_graph(spec.semi_axes), spec.center);
  }
  throw ScenarioError("unknown domain kind");
}

MetricScenario build_scenario(const ScenarioSpec& spec, double r_out,
                              const SynthesisOptions& synthesis) {
  MetricScenario sc{build_domain(spec), nullptr, spec.label, std::nullopt};
  std::optional<double> m_known;
  switch (spec.factor) {
    case FactorKind::Constant:
      sc.factor = constant_factor(spec.factor_value);
      if (spec.factor_value == 1.0) m_known = 0.0;
      break;
    case FactorKind::Schwarzschild:
      sc.factor = schwarzschild_factor(spec.factor_value, spec.center);
      m_known = spec.factor_value;
      break;
    case FactorKind::Synthesize:
      sc.factor = synthesize_minimal_boundary_factor(sc.domain, r_out, synthesis);
      // On a ball the Robin problem is solved by Schwarzschild with m = 2R.
      if (spec.domain == DomainKind::Ball) m_known = 2.0 * spec.radius;
      break;
  }
  if (spec.factor_scale != 1.0) {
    sc.factor = scaled_factor(sc.factor, spec.factor_scale);
    m_known.reset();
  }
  if (spec.domain == DomainKind::Ball) {
    AnalyticReference ref;
    const double r = spec.radius;
    const Vec3 c = spec.center;
    ref.potential = [r, c](const Vec3& x) { return std::log((x - c).norm() / r); };
    ref.capacity = r;
    ref.m_adm = m_known;
    sc.reference = ref;
  }
  return sc;
}

RunConfig parse_run_config_json(const std::string& text, const std::string& config_dir) {
  const json j = parse(text, "run config");
  RunConfig c;
  c.config_dir = config_dir;
  try {
    if (!j.is_object()) throw ScenarioError("run config must be a JSON object");
    if (!j.contains("scenario")) throw ScenarioError("run config needs 'scenario'");
    if (j["scenario"].is_string()) {
      fs::path p = j["scenario"].get<std::string>();
      if (p.is_relative()) p = fs::path(config_dir) / p;
      if (!fs::exists(p)) throw ScenarioError("scenario file '" + p.string() + "' not found");
      c.scenario_path = p.string();
    } else {
      c.scenario = scenario_from_json(j["scenario"]);
    }
    if (j.contains("grid")) {
      const json& g = j["grid"];
      if (g.contains("r_out")) {
        const json& r = g["r_out"];
        if (!r.is_array() || r.size() != 2) throw ScenarioError("'r_out' must be a pair");
        c.r_out_factors = {r[0].get<double>(), r[1].get<double>()};
        if (!(c.r_out_factors[0] > 1.0 && c.r_out_factors[1] > 1.0) ||
            c.r_out_factors[0] == c.r_out_factors[1])
          throw ScenarioError("'r_out' needs two distinct factors above 1");
      }
      if (g.contains("resolution")) c.resolution = resolution_from_json(g["resolution"]);
    }
    if (j.contains("synthesis") && j["synthesis"].contains("resolution"))
      c.synthesis.resolution = resolution_from_json(j["synthesis"]["resolution"]);
    if (j.contains("solver")) {
      const json& s = j["solver"];
      SolverConfig& sc = c.solver;
      sc.picard_tol = s.value("picard_tol", sc.picard_tol);
      sc.max_picard = s.value("max_picard", sc.max_picard);
      sc.damping = s.value("damping", sc.damping);
      sc.linear_tol_factor = s.value("linear_tol_factor", sc.linear_tol_factor);
      sc.max_linear = s.value("max_linear", sc.max_linear);
      if (s.contains("epsilon_schedule"))
        sc.epsilon_schedule = s["epsilon_schedule"].get<std::vector<double>>();
      try {
        sc.validate();
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
      }
    }
    if (j.contains("levels")) {
      const json& l = j["levels"];
      c.level_count = l.value("count", c.level_count);
      c.t_min = l.value("t_min", c.t_min);
      c.max_fraction = l.value("max_fraction", c.max_fraction);
      c.flux_levels = l.value("flux_levels", c.flux_levels);
      if (c.level_count < 2 || c.flux_levels < 1 || !(c.t_min > 0.0) ||
          !(c.max_fraction > 0.0 && c.max_fraction < 1.0))
        throw ScenarioError("invalid 'levels' section");
    }
    if (j.contains("outputs")) {
      fs::path p = j["outputs"].get<std::string>();
      if (p.is_relative()) p = fs::path(config_dir) / p;
      c.output_dir = p.string();
    } else {
      c.output_dir = (fs::path(config_dir) / "out").string();
    }
    c.deterministic = j.value("deterministic", false);
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    c.dump_surfaces = j.value("dump_surfaces", false);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_file(path);
  const fs::path dir = fs::path(path).parent_path();
  return parse_run_config_json(text, dir.empty() ? "." : dir.string());
}

ScenarioSpec resolve_scenario(const RunConfig& config) {
  if (config.scenario) return *config.scenario;
  return load_scenario(config.scenario_path);
}

}  // namespace caplab
