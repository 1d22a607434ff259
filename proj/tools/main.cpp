#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "config.hpp"
#include "eprsim/acceptance.hpp"
#include "eprsim/trajectory.hpp"
#include "eprsim/version.hpp"

using nlohmann::json;
using namespace eprsim;
using cli::KeyValues;
using cli::RunConfig;

namespace {

// exit codes
constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kAcceptanceFailure = 2;
constexpr int kInternal = 3;

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit Output(const std::string& path) {
    if (path != "-") {
      file.open(path);
      if (!file) throw std::invalid_argument("cannot open output path: " + path);
      os = &file;
    }
  }
  std::ostream& stream() { return *os; }
};

json config_json(const RunConfig& rc) {
  json j;
  for (const auto& [k, v] : rc.resolved()) j[k] = v;
  j["version"] = kVersion;
  return j;
}

void emit_json(const RunConfig& rc, json payload) {
  payload["config"] = config_json(rc);
  Output out(rc.output_path);
  out.stream() << payload.dump(2) << "\n";
}

std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<double> parse_grid(const std::string& spec_str, double unit) {
  // "start:stop:step"
  double start, stop, step;
  if (std::sscanf(spec_str.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0)
    throw std::invalid_argument("grid must be start:stop:step with positive step: " + spec_str);
  std::vector<double> out;
  for (double v = start; v <= stop + 1e-9 * step; v += step) out.push_back(v * unit);
  return out;
}

// Shared flags -> raw key-values; resolution happens in resolve_config so
// that file/flag precedence is uniform.
struct CommonFlags {
  std::string config_path;
  KeyValues kv;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "flat key=value config file");
    auto opt = [this, app](const char* flag, const char* key, const char* help) {
      app->add_option_function<std::string>(
             flag, [this, key](const std::string& v) { kv[key] = v; }, help)
          ->expected(1);
    };
    opt("--thetaA,--theta-a", "settings.theta_a", "setting at A (deg unless --units rad)");
    opt("--thetaB,--theta-b", "settings.theta_b", "setting at B");
    opt("--thetaA-prime,--theta-a-prime", "settings.theta_a_prime", "shifted setting at A");
    opt("--thetaB-prime,--theta-b-prime", "settings.theta_b_prime", "shifted setting at B");
    opt("--units", "settings.units", "angle units: deg or rad");
    opt("--mode", "settings.mode", "von-neumann or stern-gerlach");
    opt("--aA,--a-a", "couplings.a_a", "coupling amplitude at A");
    opt("--aB,--a-b", "couplings.a_b", "coupling amplitude at B");
    opt("--width", "packet.width", "pointer packet width");
    opt("--ensemble", "ensemble.kind",
        "equilibrium | sub-rectangle | half-square | quadrant | linear-tilt | grid-weights | "
        "point-mass");
    opt("--side", "ensemble.side", "half-square side");
    opt("--quadrant-id", "ensemble.quadrant", "quadrant name");
    opt("--x0", "ensemble.x0", "sub-rectangle bound");
    opt("--x1", "ensemble.x1", "sub-rectangle bound");
    opt("--y0", "ensemble.y0", "sub-rectangle bound");
    opt("--y1", "ensemble.y1", "sub-rectangle bound");
    opt("--tilt", "ensemble.tilt", "linear-tilt coefficient");
    opt("--rA0", "ensemble.r_a0", "point-mass coordinate");
    opt("--rB0", "ensemble.r_b0", "point-mass coordinate");
    opt("--weights-file", "ensemble.file", "grid-weights file");
    opt("--method", "method.kind", "mc | grid | columns");
    opt("--n", "method.n", "mc sample count");
    opt("--seed", "method.seed", "mc seed");
    opt("--m", "method.m", "grid resolution");
    opt("--columns", "method.columns", "columns-method column count");
    opt("--format", "output.format", "csv or json");
    opt("--out", "output.path", "output path, - for stdout");
  }

  RunConfig resolve() const {
    const KeyValues file = config_path.empty() ? KeyValues{} : cli::parse_config_file(config_path);
    return cli::resolve_config(file, kv);
  }
};

json transition_json(const TransitionReport& r) {
  return json{{"wing", std::string(1, r.wing)},
              {"nu_plus_minus", r.nu_plus_minus},
              {"nu_minus_plus", r.nu_minus_plus},
              {"nu_plus_minus_err", r.nu_pm_err},
              {"nu_minus_plus_err", r.nu_mp_err},
              {"degree", r.degree},
              {"degree_err", r.degree_err}};
}

int cmd_trajectory(const CommonFlags& cf, double r_a0, double r_b0, bool numeric, double dt) {
  const RunConfig rc = cf.resolve();
  const SpinAmplitudes amps =
      singlet_amplitudes({rc.theta_a, rc.theta_b, rc.mode});
  const HiddenVariable lambda{r_a0, r_b0};
  const Trajectory tr =
      numeric ? evolve_numeric(lambda, amps, rc.couplings, rc.packet,
                               dt > 0 ? dt : rc.packet.width / 1000.0)
              : evolve_exact(lambda, amps, rc.couplings, rc.packet);
  if (rc.output_format == "json") {
    json pts = json::array();
    for (const auto& p : tr.points)
      pts.push_back({{"t", p.t}, {"r_A", p.r_a}, {"r_B", p.r_b}, {"region_id", p.region}});
    emit_json(rc, json{{"trajectory", pts},
                       {"outcome", {{"sigma_A", tr.outcome.sigma_a},
                                    {"sigma_B", tr.outcome.sigma_b}}}});
  } else {
    Output out(rc.output_path);
    write_trajectory_csv(out.stream(), tr);
  }
  return kOk;
}

int cmd_outcomes(const CommonFlags& cf) {
  const RunConfig rc = cf.resolve();
  const OutcomeStatistics st =
      outcome_statistics({rc.theta_a, rc.theta_b, rc.mode}, StatePrep{}, rc.couplings, rc.packet,
                         rc.make_distribution(), rc.method);
  if (rc.output_format == "json") {
    emit_json(rc, json{{"p_sigmaA_plus", st.p_a_plus},
                       {"p_sigmaA_plus_err", st.p_a_err},
                       {"p_sigmaB_plus", st.p_b_plus},
                       {"p_sigmaB_plus_err", st.p_b_err},
                       {"correlation", st.correlation},
                       {"correlation_err", st.corr_err}});
  } else {
    Output out(rc.output_path);
    out.stream() << "p_sigmaA_plus,p_sigmaA_plus_err,p_sigmaB_plus,p_sigmaB_plus_err,"
                    "correlation,correlation_err\n"
                 << csv_num(st.p_a_plus) << ',' << csv_num(st.p_a_err) << ','
                 << csv_num(st.p_b_plus) << ',' << csv_num(st.p_b_err) << ','
                 << csv_num(st.correlation) << ',' << csv_num(st.corr_err) << "\n";
  }
  return kOk;
}

int cmd_correlation(const CommonFlags& cf, const std::string& grid_spec) {
  const RunConfig rc = cf.resolve();
  const double unit = rc.units == "deg" ? kPi / 180.0 : 1.0;
  const std::vector<double> deltas = parse_grid(grid_spec, unit);
  const EnsembleDistribution dist = rc.make_distribution();
  Output out(rc.output_path);
  out.stream() << "delta_rad,correlation,correlation_err,expected\n";
  for (double d : deltas) {
    const OutcomeStatistics st =
        outcome_statistics({rc.theta_a, rc.theta_a + d, rc.mode}, StatePrep{}, rc.couplings,
                           rc.packet, dist, rc.method);
    out.stream() << csv_num(d) << ',' << csv_num(st.correlation) << ',' << csv_num(st.corr_err)
                 << ',' << csv_num(-std::cos(d)) << "\n";
  }
  return kOk;
}

int cmd_nonlocality(const CommonFlags& cf) {
  const RunConfig rc = cf.resolve();
  const EnsembleDistribution eq = EnsembleDistribution::equilibrium(rc.packet);
  const TransitionReport alpha =
      transition_fractions(TransitionKind::Alpha, rc.theta_a, rc.theta_b, rc.theta_b_prime,
                           StatePrep{}, rc.couplings, rc.packet, eq, rc.method, rc.mode);
  const TransitionReport beta_tilde =
      transition_fractions(TransitionKind::BetaTilde, rc.theta_a, rc.theta_b, rc.theta_b_prime,
                           StatePrep{}, rc.couplings, rc.packet, eq, rc.method, rc.mode);
  const TransitionReport beta =
      transition_fractions(TransitionKind::Beta, rc.theta_a, rc.theta_b, rc.theta_a_prime,
                           StatePrep{}, rc.couplings, rc.packet, eq, rc.method, rc.mode);

  BoundInputs in;
  in.alpha = alpha.degree;
  in.beta = beta.degree;
  in.beta_tilde = beta_tilde.degree;
  json bounds = json::array();
  const double tol = 3 * alpha.degree_err;
  bounds.push_back({{"id", 1},
                    {"lhs", bound_check(1, rc.theta_a, rc.theta_b, rc.theta_b_prime, in,
                                        rc.couplings, tol)
                                .lhs},
                    {"rhs", bound_check(1, rc.theta_a, rc.theta_b, rc.theta_b_prime, in,
                                        rc.couplings, tol)
                                .rhs}});
  const BoundCheck b2 = bound_check(2, rc.theta_a, rc.theta_b, rc.theta_b_prime - rc.theta_b, in,
                                    rc.couplings, tol);
  json jb2 = {{"id", 2}, {"lhs", b2.lhs}, {"rhs", b2.rhs}, {"satisfied", b2.satisfied}};
  if (!b2.warning.empty()) jb2["warning"] = b2.warning;
  bounds.push_back(jb2);

  emit_json(rc, json{{"alpha", transition_json(alpha)},
                     {"beta", transition_json(beta)},
                     {"beta_tilde", transition_json(beta_tilde)},
                     {"bounds", bounds}});
  return kOk;
}

int cmd_signal(const CommonFlags& cf) {
  const RunConfig rc = cf.resolve();
  const SignalReport s = signal(TransitionKind::Alpha, rc.theta_a, rc.theta_b, rc.theta_b_prime,
                                rc.couplings, rc.packet, rc.make_distribution(), rc.method,
                                rc.mode);
  emit_json(rc, json{{"p_plus_before", s.p_plus_before},
                     {"p_plus_after", s.p_plus_after},
                     {"signal", s.signal},
                     {"std_error", s.std_error},
                     {"transitions", transition_json(s.transitions)}});
  return kOk;
}

int cmd_sweep(const CommonFlags& cf, const std::string& grid_spec, int bound_id) {
  const RunConfig rc = cf.resolve();
  if (bound_id != 1 && bound_id != 5)
    throw std::invalid_argument("--check-bound must be 1 or 5 for sweep");
  const double unit = rc.units == "deg" ? kPi / 180.0 : 1.0;
  const std::vector<double> deltas = parse_grid(grid_spec, unit);
  const EnsembleDistribution eq = EnsembleDistribution::equilibrium(rc.packet);
  Output out(rc.output_path);
  out.stream() << "delta_rad,alpha,alpha_err,beta_tilde,beta_tilde_err,bound_rhs,gap\n";
  for (double d : deltas) {
    const TransitionReport a =
        transition_fractions(TransitionKind::Alpha, rc.theta_a, rc.theta_b, rc.theta_b + d,
                             StatePrep{}, rc.couplings, rc.packet, eq, rc.method, rc.mode);
    const TransitionReport bt =
        transition_fractions(TransitionKind::BetaTilde, rc.theta_a, rc.theta_b, rc.theta_b + d,
                             StatePrep{}, rc.couplings, rc.packet, eq, rc.method, rc.mode);
    BoundInputs in;
    in.alpha = a.degree;
    in.beta_tilde = bt.degree;
    const BoundCheck b =
        bound_check(bound_id, rc.theta_a, rc.theta_b,
                    bound_id == 1 ? rc.theta_b + d : d, in, rc.couplings);
    out.stream() << csv_num(d) << ',' << csv_num(a.degree) << ',' << csv_num(a.degree_err) << ','
                 << csv_num(bt.degree) << ',' << csv_num(bt.degree_err) << ','
                 << csv_num(b.rhs) << ',' << csv_num(b.gap) << "\n";
  }
  return kOk;
}

int cmd_entanglement(const CommonFlags& cf, const std::string& eps_spec,
                     const std::string& delta_spec) {
  const RunConfig rc = cf.resolve();
  const double unit = rc.units == "deg" ? kPi / 180.0 : 1.0;
  std::vector<double> deltas = parse_grid(delta_spec, unit);
  // snap near-pi values so the fit recognizes the delta = pi row
  for (double& d : deltas)
    if (std::abs(d - kPi) < 1e-9) d = kPi;
  const std::vector<double> eps = parse_grid(eps_spec, 1.0);
  const EntanglementSweepResult res =
      entanglement_sweep(eps, deltas, rc.couplings, rc.packet, rc.method);
  if (rc.output_format == "json") {
    json rows = json::array();
    for (const SweepEntry& e : res.entries)
      rows.push_back({{"eps", e.eps}, {"delta_rad", e.delta}, {"alpha", e.alpha},
                      {"alpha_err", e.alpha_err}});
    json j{{"table", rows}};
    if (res.fit_at_pi)
      j["fit_at_pi"] = {{"intercept", res.fit_at_pi->intercept},
                        {"eps2_coefficient", res.fit_at_pi->coeff}};
    emit_json(rc, j);
  } else {
    Output out(rc.output_path);
    out.stream() << "eps,delta_rad,alpha,alpha_err\n";
    for (const SweepEntry& e : res.entries)
      out.stream() << csv_num(e.eps) << ',' << csv_num(e.delta) << ',' << csv_num(e.alpha) << ','
                   << csv_num(e.alpha_err) << "\n";
    if (res.fit_at_pi)
      std::cerr << "fit at delta=pi: alpha ~ " << csv_num(res.fit_at_pi->intercept) << " + ("
                << csv_num(res.fit_at_pi->coeff) << ") * eps^2\n";
  }
  return kOk;
}

int cmd_circle(const CommonFlags& cf, double gamma_raw, const std::string& disc) {
  const RunConfig rc = cf.resolve();
  const double unit = rc.units == "deg" ? kPi / 180.0 : 1.0;
  DiscDistribution dd;
  if (disc == "uniform") dd = DiscDistribution::Uniform;
  else if (disc == "upper-half") dd = DiscDistribution::UpperHalfUniform;
  else throw std::invalid_argument("--disc must be uniform or upper-half");
  const CircleRunReport rep = circle_model_run(gamma_raw * unit, dd, rc.method);
  emit_json(rc, json{{"gamma_rad", rep.gamma},
                     {"p_plus_before", rep.p_plus_before},
                     {"p_plus_after", rep.p_plus_after},
                     {"nu_plus_minus", rep.nu_plus_minus},
                     {"nu_minus_plus", rep.nu_minus_plus},
                     {"std_error", rep.std_error},
                     {"expected_equilibrium_wedge", std::abs(rep.gamma) / (2 * kPi)}});
  return kOk;
}

int cmd_bits(const CommonFlags& cf) {
  const RunConfig rc = cf.resolve();
  emit_json(rc, json{{"mean_bits_full_range", nonlocal_bits(-kPi, kPi)},
                     {"mean_bits_stern_gerlach_range", nonlocal_bits(-kPi / 2, kPi / 2)}});
  return kOk;
}

int cmd_search_balanced(const CommonFlags& cf, const std::vector<std::string>& triples_raw,
                        const std::string& family, int budget, int random_triples_n) {
  const RunConfig rc = cf.resolve();
  const double unit = rc.units == "deg" ? kPi / 180.0 : 1.0;
  std::vector<ThetaTriple> triples;
  for (const std::string& s : triples_raw) {
    ThetaTriple t;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &t.theta_a, &t.theta_b, &t.theta_b_prime) != 3)
      throw std::invalid_argument("--triple must be thetaA,thetaB,thetaBprime: " + s);
    t.theta_a *= unit;
    t.theta_b *= unit;
    t.theta_b_prime *= unit;
    triples.push_back(t);
  }
  for (int k = 0; k < random_triples_n; ++k) {
    CounterRng rng = CounterRng::at(rc.method.seed + 1, static_cast<std::uint64_t>(k));
    triples.push_back({rng.next_in(-kPi, kPi), rng.next_in(-kPi, kPi), rng.next_in(-kPi, kPi)});
  }
  const BalancedSearchResult res = balanced_distribution_search(
      triples, family, budget, rc.couplings, rc.packet, rc.method);
  emit_json(rc, json{{"family", res.family},
                     {"candidate", res.candidate},
                     {"residuals", res.residuals},
                     {"max_residual", res.max_residual},
                     {"is_equilibrium", res.is_equilibrium}});
  return kOk;
}

int cmd_verify(const CommonFlags& cf, bool as_json) {
  const std::vector<CriterionResult> results = run_acceptance(as_json ? nullptr : &std::cout);
  if (as_json) {
    const RunConfig rc = cf.resolve();
    json rows = json::array();
    for (const CriterionResult& r : results)
      rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail},
                      {"seconds", r.seconds}});
    emit_json(rc, json{{"criteria", rows}, {"all_passed", all_passed(results)}});
  }
  return all_passed(results) ? kOk : kAcceptanceFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic hidden-variables simulator for EPR singlet experiments"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    CommonFlags flags;
  };
  auto add = [&](const char* name, const char* help) {
    auto sub = std::make_shared<Sub>();
    sub->app = app.add_subcommand(name, help);
    sub->flags.attach(sub->app);
    return sub;
  };

  auto s_traj = add("trajectory", "dump one hidden variable's pointer trajectory");
  auto r_a0 = std::make_shared<double>(0.1);
  auto r_b0 = std::make_shared<double>(0.2);
  auto numeric = std::make_shared<bool>(false);
  auto traj_dt = std::make_shared<double>(0.0);
  s_traj->app->add_option("--rA", *r_a0, "initial pointer position at A");
  s_traj->app->add_option("--rB", *r_b0, "initial pointer position at B");
  s_traj->app->add_flag("--numeric", *numeric, "use the fixed-step integrator");
  s_traj->app->add_option("--dt", *traj_dt, "fixed step for --numeric");

  auto s_out = add("outcomes", "outcome marginals and correlation under a distribution");

  auto s_corr = add("correlation", "correlation across a setting-difference grid");
  auto corr_grid = std::make_shared<std::string>("0:180:15");
  s_corr->app->add_option("--delta-grid", *corr_grid, "start:stop:step");

  auto s_nl = add("nonlocality", "degrees of nonlocality alpha, beta, beta~ and bounds");
  auto s_sig = add("signal", "statistical signal under a (non)equilibrium distribution");

  auto s_sweep = add("sweep", "alpha and beta~ across a shift grid with a bound check");
  auto sweep_grid = std::make_shared<std::string>("0:180:15");
  auto sweep_bound = std::make_shared<int>(5);
  s_sweep->app->add_option("--delta-grid", *sweep_grid, "start:stop:step");
  s_sweep->app->add_option("--check-bound", *sweep_bound, "bound id: 1 or 5");

  auto s_ent = add("entanglement", "alpha(0,0,delta) for perturbed singlet states");
  auto ent_eps = std::make_shared<std::string>("0.01:0.05:0.01");
  auto ent_delta = std::make_shared<std::string>("180:180:1");
  s_ent->app->add_option("--eps-grid", *ent_eps, "start:stop:step (dimensionless)");
  s_ent->app->add_option("--delta-grid", *ent_delta, "start:stop:step");

  auto s_circ = add("circle", "illustrative unit-circle hidden-variable model");
  auto gamma = std::make_shared<double>(15.0);
  auto disc = std::make_shared<std::string>("uniform");
  s_circ->app->add_option("--gamma", *gamma, "chord rotation (deg unless --units rad)");
  s_circ->app->add_option("--disc", *disc, "uniform or upper-half");

  auto s_bits = add("bits", "mean lower bounds on nonlocal bits per pair");

  auto s_bal = add("search-balanced", "search a family for a balanced nonequilibrium rho");
  auto triples = std::make_shared<std::vector<std::string>>();
  auto family = std::make_shared<std::string>("linear-tilt");
  auto budget = std::make_shared<int>(33);
  auto random_n = std::make_shared<int>(0);
  s_bal->app->add_option("--triple", *triples, "thetaA,thetaB,thetaBprime (repeatable)");
  s_bal->app->add_option("--family", *family, "linear-tilt or grid-weights");
  s_bal->app->add_option("--budget", *budget, "candidate evaluations");
  s_bal->app->add_option("--random-triples", *random_n, "append n random triples");

  auto s_ver = add("verify", "run the full verification suite");
  auto verify_json = std::make_shared<bool>(false);
  s_ver->app->add_flag("--json", *verify_json, "emit JSON instead of progress lines");

  CLI11_PARSE(app, argc, argv);

  try {
    if (s_traj->app->parsed())
      return cmd_trajectory(s_traj->flags, *r_a0, *r_b0, *numeric, *traj_dt);
    if (s_out->app->parsed()) return cmd_outcomes(s_out->flags);
    if (s_corr->app->parsed()) return cmd_correlation(s_corr->flags, *corr_grid);
    if (s_nl->app->parsed()) return cmd_nonlocality(s_nl->flags);
    if (s_sig->app->parsed()) return cmd_signal(s_sig->flags);
    if (s_sweep->app->parsed()) return cmd_sweep(s_sweep->flags, *sweep_grid, *sweep_bound);
    if (s_ent->app->parsed()) return cmd_entanglement(s_ent->flags, *ent_eps, *ent_delta);
    if (s_circ->app->parsed()) return cmd_circle(s_circ->flags, *gamma, *disc);
    if (s_bits->app->parsed()) return cmd_bits(s_bits->flags);
    if (s_bal->app->parsed())
      return cmd_search_balanced(s_bal->flags, *triples, *family, *budget, *random_n);
    if (s_ver->app->parsed()) return cmd_verify(s_ver->flags, *verify_json);
    std::cerr << "no subcommand\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
