#include "gma3/run_config.hh"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gma3/path_constants.hh"

namespace gma3 {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw domain_error(what); }

Complex parse_entry(const json& e, const std::string& where) {
  if (e.is_number()) return Complex(e.get<double>(), 0.0);
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return Complex(e[0].get<double>(), e[1].get<double>());
  bad(where + ": matrix entries must be numbers or [re, im] pairs");
}

HermitianForm parse_matrix(const json& m, const std::string& where) {
  if (!m.is_array() || m.size() != 3)
    bad(where + ": expected a 3x3 matrix (array of 3 rows)");
  Matrix3c raw;
  for (int r = 0; r < 3; ++r) {
    const json& row = m[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 3)
      bad(where + ": each row must have 3 entries");
    for (int c = 0; c < 3; ++c)
      raw(r, c) = parse_entry(row[static_cast<std::size_t>(c)], where);
  }
  try {
    return HermitianForm::from_matrix(raw);
  } catch (const error& e) {
    bad(where + ": " + e.what());
  }
}

std::vector<TrigMode> parse_modes(const json& arr) {
  std::vector<TrigMode> modes;
  if (!arr.is_array()) bad("background.psi0_modes must be an array");
  for (const json& e : arr) {
    TrigMode m;
    const std::string type = e.value("type", "cos");
    if (type == "cos")
      m.is_cos = true;
    else if (type == "sin")
      m.is_cos = false;
    else
      bad("psi0_modes[].type must be \"cos\" or \"sin\"");
    if (!e.contains("wave") || !e["wave"].is_array() ||
        e["wave"].size() != TorusGrid::kAxes)
      bad("psi0_modes[].wave must be an array of 6 integers");
    for (int a = 0; a < TorusGrid::kAxes; ++a)
      m.wave[static_cast<std::size_t>(a)] =
          e["wave"][static_cast<std::size_t>(a)].get<int>();
    if (!e.contains("amplitude") || !e["amplitude"].is_number())
      bad("psi0_modes[].amplitude must be a number");
    m.amplitude = e["amplitude"].get<double>();
    modes.push_back(m);
  }
  return modes;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;

  if (!root.contains("grid") || !root["grid"].is_object())
    bad("missing \"grid\" object");
  const json& grid = root["grid"];
  if (!grid.contains("dims_active")) bad("grid.dims_active is required");
  cfg.dims_active = grid["dims_active"].get<int>();
  if (!grid.contains("resolution") || !grid["resolution"].is_array())
    bad("grid.resolution must be an array");
  for (const json& r : grid["resolution"])
    cfg.resolution.push_back(r.get<int>());

  if (!root.contains("background") || !root["background"].is_object())
    bad("missing \"background\" object");
  const json& bg = root["background"];
  if (!bg.contains("omega")) bad("background.omega is required");
  cfg.omega = parse_matrix(bg["omega"], "background.omega");
  if (bg.contains("Omega0"))
    cfg.Omega0 = parse_matrix(bg["Omega0"], "background.Omega0");
  if (bg.contains("curvature"))
    cfg.curvature = parse_matrix(bg["curvature"], "background.curvature");
  if (cfg.Omega0.has_value() == cfg.curvature.has_value())
    bad("background needs exactly one of \"Omega0\" or \"curvature\"");
  if (bg.contains("theta_hat")) cfg.theta_hat = bg["theta_hat"].get<double>();
  if (cfg.Omega0 && !cfg.theta_hat)
    bad("background.theta_hat is required alongside Omega0");
  if (bg.contains("psi0_modes")) cfg.psi0_modes = parse_modes(bg["psi0_modes"]);

  if (root.contains("solver")) {
    const json& s = root["solver"];
    SolverConfig& sc = cfg.solver;
    sc.newton_tol = s.value("newton_tol", sc.newton_tol);
    sc.max_newton_iters = s.value("max_newton_iters", sc.max_newton_iters);
    sc.linear_tol = s.value("linear_tol", sc.linear_tol);
    sc.max_linear_iters = s.value("max_linear_iters", sc.max_linear_iters);
    sc.t_step_init = s.value("t_step_init", sc.t_step_init);
    sc.t_step_min = s.value("t_step_min", sc.t_step_min);
    sc.t_step_max = s.value("t_step_max", sc.t_step_max);
    sc.cone_margin_floor = s.value("cone_margin_floor", sc.cone_margin_floor);
  }
  cfg.output_dir = root.value("output_dir", cfg.output_dir);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

BackgroundData prepare_background(const RunConfig& config) {
  const TorusGrid grid = TorusGrid::make(config.dims_active, config.resolution);
  const ScalarField psi0 = synthesize_modes(grid, config.psi0_modes);

  if (config.Omega0) {
    const PhaseParameter ph = PhaseParameter::from_angle(*config.theta_hat);
    BackgroundData bg =
        make_background(grid, config.omega, *config.Omega0, psi0, ph);
    // Cross-check the declared angle against the total class integral of
    // the implied curvature form Theta = Omega0 + tan(th) omega.
    FormField i_theta = bg.Omega0;
    for (auto& h : i_theta.v) h.m += ph.tan_theta() * config.omega.m;
    const Complex Z = phase_integral(grid, config.omega, i_theta);
    const PhaseParameter derived = compute_theta_hat(Z);
    if (std::abs(derived.theta_hat() - ph.theta_hat()) > 1e-10) {
      std::ostringstream msg;
      msg << "declared theta_hat " << ph.theta_hat()
          << " disagrees with the class integral (" << derived.theta_hat()
          << ")";
      throw inadmissible_class_error(msg.str());
    }
    return bg;
  }

  // Curvature given: derive the angle, then shift to the Monge-Ampere form.
  FormField i_theta = FormField::constant(grid, *config.curvature);
  {
    const FormField hess = complex_hessian(psi0);
    for (std::size_t p = 0; p < i_theta.v.size(); ++p)
      i_theta.v[p].m += hess.v[p].m;
  }
  const Complex Z = phase_integral(grid, config.omega, i_theta);
  const PhaseParameter ph = compute_theta_hat(Z);
  HermitianForm Omega0_const = *config.curvature;
  Omega0_const.m -= ph.tan_theta() * config.omega.m;
  return make_background(grid, config.omega, Omega0_const, psi0, ph);
}

}  // namespace gma3
