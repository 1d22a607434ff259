#include "eprsim/nonlocality.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "eprsim/parallel.hpp"
#include "eprsim/trajectory.hpp"

namespace eprsim {

namespace {

struct SettingsPair {
  MeasurementSettings before, after;
  char wing;  // outcomes compared at this wing
};

SettingsPair settings_for(TransitionKind kind, double theta_a, double theta_b,
                          double theta_shifted, InteractionMode mode) {
  switch (kind) {
    case TransitionKind::Alpha:
      return {{theta_a, theta_b, mode}, {theta_a, theta_shifted, mode}, 'A'};
    case TransitionKind::Beta:
      return {{theta_a, theta_b, mode}, {theta_shifted, theta_b, mode}, 'B'};
    case TransitionKind::BetaTilde:
      return {{theta_a, theta_b, mode}, {theta_a, theta_shifted, mode}, 'B'};
  }
  throw std::logic_error("unreachable");
}

int wing_outcome(const OutcomePair& o, char wing) { return wing == 'A' ? o.sigma_a : o.sigma_b; }

}  // namespace

OutcomeStatistics outcome_statistics(const MeasurementSettings& settings, const StatePrep& state,
                                     const CouplingProfile& couplings, const PacketSpec& packet,
                                     const EnsembleDistribution& dist, const Method& method) {
  const SpinAmplitudes amps = state.at(settings);
  auto outcome = [&](const HiddenVariable& l) {
    return classify_outcome(l, amps, couplings, packet);
  };
  OutcomeStatistics st;
  FractionEstimate pa =
      region_fraction(dist, [&](const HiddenVariable& l) { return outcome(l).sigma_a > 0; },
                      method);
  FractionEstimate pb =
      region_fraction(dist, [&](const HiddenVariable& l) { return outcome(l).sigma_b > 0; },
                      method);
  FractionEstimate agree = region_fraction(
      dist, [&](const HiddenVariable& l) { auto o = outcome(l); return o.sigma_a == o.sigma_b; },
      method);
  st.p_a_plus = pa.value;
  st.p_a_err = pa.error;
  st.p_b_plus = pb.value;
  st.p_b_err = pb.error;
  st.correlation = 2 * agree.value - 1;  // E = P(equal) - P(opposite)
  st.corr_err = 2 * agree.error;
  return st;
}

TransitionReport transition_fractions(TransitionKind kind, double theta_a, double theta_b,
                                      double theta_shifted, const StatePrep& state,
                                      const CouplingProfile& couplings, const PacketSpec& packet,
                                      const EnsembleDistribution& dist, const Method& method,
                                      InteractionMode mode) {
  const SettingsPair sp = settings_for(kind, theta_a, theta_b, theta_shifted, mode);
  const SpinAmplitudes amps_before = state.at(sp.before);
  const SpinAmplitudes amps_after = state.at(sp.after);

  auto flip = [&](const HiddenVariable& l, int from) {
    const int o0 = wing_outcome(classify_outcome(l, amps_before, couplings, packet), sp.wing);
    if (o0 != from) return false;
    const int o1 = wing_outcome(classify_outcome(l, amps_after, couplings, packet), sp.wing);
    return o1 == -from;
  };

  TransitionReport r;
  r.kind = kind;
  r.wing = sp.wing;
  r.before = sp.before;
  r.after = sp.after;
  const FractionEstimate pm =
      region_fraction(dist, [&](const HiddenVariable& l) { return flip(l, +1); }, method);
  const FractionEstimate mp =
      region_fraction(dist, [&](const HiddenVariable& l) { return flip(l, -1); }, method);
  r.nu_plus_minus = pm.value;
  r.nu_pm_err = pm.error;
  r.nu_minus_plus = mp.value;
  r.nu_mp_err = mp.error;
  r.degree = pm.value + mp.value;
  r.degree_err = std::hypot(pm.error, mp.error);
  return r;
}

DetailedBalanceReport detailed_balance_check(TransitionKind kind, double theta_a, double theta_b,
                                             double theta_shifted,
                                             const CouplingProfile& couplings,
                                             const PacketSpec& packet, const Method& method,
                                             InteractionMode mode) {
  const EnsembleDistribution eq = EnsembleDistribution::equilibrium(packet);
  const TransitionReport r = transition_fractions(kind, theta_a, theta_b, theta_shifted,
                                                  StatePrep{}, couplings, packet, eq, method, mode);
  DetailedBalanceReport db;
  db.nu_plus_minus = r.nu_plus_minus;
  db.nu_minus_plus = r.nu_minus_plus;
  db.difference = std::abs(r.nu_plus_minus - r.nu_minus_plus);
  db.std_error = r.degree_err;
  return db;
}

SignalReport signal(TransitionKind kind, double theta_a, double theta_b, double theta_shifted,
                    const CouplingProfile& couplings, const PacketSpec& packet,
                    const EnsembleDistribution& dist, const Method& method,
                    InteractionMode mode) {
  const SettingsPair sp = settings_for(kind, theta_a, theta_b, theta_shifted, mode);
  const SpinAmplitudes amps_before = StatePrep{}.at(sp.before);
  SignalReport s;
  s.transitions = transition_fractions(kind, theta_a, theta_b, theta_shifted, StatePrep{},
                                       couplings, packet, dist, method, mode);
  const FractionEstimate p0 = region_fraction(
      dist,
      [&](const HiddenVariable& l) {
        return wing_outcome(classify_outcome(l, amps_before, couplings, packet), sp.wing) > 0;
      },
      method);
  s.p_plus_before = p0.value;
  // the shift moves exactly the transition sets, so P(+1) changes by
  // nu(-,+) - nu(+,-)
  s.signal = s.transitions.nu_minus_plus - s.transitions.nu_plus_minus;
  s.p_plus_after = s.p_plus_before + s.signal;
  s.std_error = s.transitions.degree_err;
  return s;
}

BoundCheck bound_check(int id, double theta_a, double theta_b, double shift,
                       const BoundInputs& measured, const CouplingProfile& couplings,
                       double tolerance) {
  auto need = [&](const std::optional<double>& v, const char* name) {
    if (!v) throw std::invalid_argument(std::string("bound check requires measured ") + name);
    return *v;
  };
  BoundCheck b;
  b.id = id;
  switch (id) {
    case 1:
      b.lhs = need(measured.alpha, "alpha") + need(measured.beta_tilde, "beta_tilde");
      b.rhs = 0.5 * std::abs(std::cos(theta_a - shift) - std::cos(theta_a - theta_b));
      break;
    case 2:
    case 3:
      b.lhs = need(measured.alpha, "alpha") + need(measured.beta, "beta");
      b.rhs = 0.5 * std::abs(std::cos(theta_a - theta_b - shift) - std::cos(theta_a - theta_b));
      break;
    case 4:
    case 5:
      b.lhs = need(measured.alpha, "alpha");
      b.rhs = 0.25 * std::abs(std::cos(theta_a - theta_b - shift) - std::cos(theta_a - theta_b));
      break;
    default:
      throw std::invalid_argument("bound id must be 1..5");
  }
  if ((id == 3 || id == 5) && (theta_a != 0.0 || theta_b != 0.0))
    throw std::invalid_argument("bounds 3 and 5 are stated at theta_a = theta_b = 0");
  if (id >= 2 && couplings.a_a != couplings.a_b)
    b.warning = "exchange symmetry broken (a_a != a_b); bounds 2-5 presume symmetric wings";
  b.gap = b.lhs - b.rhs;
  b.satisfied = b.lhs >= b.rhs - tolerance;
  return b;
}

double nonlocal_bits(double delta_lo, double delta_hi) {
  if (delta_hi < delta_lo) throw std::invalid_argument("empty shift range");
  if (delta_hi == delta_lo) return 0.0;  // degenerate range
  const double mean_cos = (std::sin(delta_hi) - std::sin(delta_lo)) / (delta_hi - delta_lo);
  return 0.25 * (1.0 - mean_cos);
}

EntanglementSweepResult entanglement_sweep(const std::vector<double>& eps_grid,
                                           const std::vector<double>& delta_grid,
                                           const CouplingProfile& couplings,
                                           const PacketSpec& packet, const Method& method) {
  if (couplings.a_a != couplings.a_b)
    throw std::invalid_argument("entanglement sweep requires equal couplings");
  const EnsembleDistribution eq = EnsembleDistribution::equilibrium(packet);
  EntanglementSweepResult res;
  std::vector<std::pair<double, double>> at_pi;  // (eps, alpha)
  for (double delta : delta_grid) {
    for (double eps : eps_grid) {
      const StatePrep prep = eps == 0.0
                                 ? StatePrep{}
                                 : StatePrep{PerturbationParams::symmetric(eps)};
      const TransitionReport r = transition_fractions(TransitionKind::Alpha, 0.0, 0.0, delta,
                                                      prep, couplings, packet, eq, method);
      res.entries.push_back({eps, delta, r.degree, r.degree_err});
      if (delta == kPi && eps > 0.0) at_pi.emplace_back(eps, r.degree);
    }
  }
  if (at_pi.size() >= 2) {
    // least squares for alpha = c0 + c2 * eps^2; the odd part of alpha(eps)
    // starts at eps^3, so no linear term is fitted
    double sz = 0, szz = 0, sy = 0, szy = 0;
    for (auto [e, a] : at_pi) {
      const double z = e * e;
      sz += z;
      szz += z * z;
      sy += a;
      szy += z * a;
    }
    const double n = static_cast<double>(at_pi.size());
    const double denom = szz - sz * sz / n;
    QuadraticFit fit;
    fit.coeff = (szy - sz * sy / n) / denom;
    fit.intercept = (sy - fit.coeff * sz) / n;
    res.fit_at_pi = fit;
  }
  return res;
}

CircleRunReport circle_model_run(double gamma, DiscDistribution dist, const Method& method) {
  if (std::abs(gamma) > kPi) throw std::invalid_argument("|gamma| must not exceed pi");
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  auto before = [](double p, double /*q*/) { return p > 0 ? +1 : -1; };
  auto after = [&](double p, double q) { return p * cg + q * sg > 0 ? +1 : -1; };

  CircleRunReport rep;
  rep.gamma = gamma;

  if (method.kind == Method::Kind::Mc) {
    struct Acc {
      std::uint64_t plus0 = 0, plus1 = 0, pm = 0, mp = 0;
    };
    const Acc acc = parallel_chunked<Acc>(
        method.n, Acc{},
        [&](std::uint64_t i, Acc& a) {
          CounterRng rng = CounterRng::at(method.seed, i);
          double p, q;
          do {  // rejection from the bounding square
            p = rng.next_in(-1, 1);
            q = rng.next_in(-1, 1);
          } while (p * p + q * q > 1.0);
          if (dist == DiscDistribution::UpperHalfUniform) q = std::abs(q);
          const int o0 = before(p, q), o1 = after(p, q);
          a.plus0 += o0 > 0;
          a.plus1 += o1 > 0;
          a.pm += o0 > 0 && o1 < 0;
          a.mp += o0 < 0 && o1 > 0;
        },
        [](Acc& t, const Acc& p_) {
          t.plus0 += p_.plus0;
          t.plus1 += p_.plus1;
          t.pm += p_.pm;
          t.mp += p_.mp;
        });
    const double n = static_cast<double>(method.n);
    rep.p_plus_before = acc.plus0 / n;
    rep.p_plus_after = acc.plus1 / n;
    rep.nu_plus_minus = acc.pm / n;
    rep.nu_minus_plus = acc.mp / n;
    rep.std_error = std::sqrt(0.25 / n);
    return rep;
  }

  // midpoint grid over the bounding square, disc-masked
  const int m = method.m;
  double mass = 0, plus0 = 0, plus1 = 0, pm = 0, mp = 0;
  for (int i = 0; i < m; ++i) {
    const double p = -1.0 + (i + 0.5) * 2.0 / m;
    for (int j = 0; j < m; ++j) {
      const double q = -1.0 + (j + 0.5) * 2.0 / m;
      if (p * p + q * q > 1.0) continue;
      if (dist == DiscDistribution::UpperHalfUniform && q < 0) continue;
      mass += 1;
      const int o0 = before(p, q), o1 = after(p, q);
      plus0 += o0 > 0;
      plus1 += o1 > 0;
      pm += o0 > 0 && o1 < 0;
      mp += o0 < 0 && o1 > 0;
    }
  }
  rep.p_plus_before = plus0 / mass;
  rep.p_plus_after = plus1 / mass;
  rep.nu_plus_minus = pm / mass;
  rep.nu_minus_plus = mp / mass;
  rep.std_error = 4.0 / m;  // boundary-cell resolution bound
  return rep;
}

BalancedSearchResult balanced_distribution_search(const std::vector<ThetaTriple>& triples,
                                                  const std::string& family, int budget,
                                                  const CouplingProfile& couplings,
                                                  const PacketSpec& packet, const Method& method) {
  BalancedSearchResult res;
  res.family = family;

  auto residuals_under = [&](const EnsembleDistribution& d) {
    std::vector<double> out;
    for (const ThetaTriple& t : triples) {
      const TransitionReport r =
          transition_fractions(TransitionKind::Alpha, t.theta_a, t.theta_b, t.theta_b_prime,
                               StatePrep{}, couplings, packet, d, method);
      out.push_back(std::abs(r.nu_plus_minus - r.nu_minus_plus));
    }
    return out;
  };
  auto max_of = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, x);
    return m;
  };

  if (triples.empty()) {
    const EnsembleDistribution eq = EnsembleDistribution::equilibrium(packet);
    res.candidate = eq.describe();
    res.is_equilibrium = true;
    res.max_residual = 0;
    return res;
  }

  if (family == "linear-tilt") {
    if (budget < 3) throw std::invalid_argument("budget must allow at least 3 candidates");
    const double cmax = 2.0 / packet.width;
    double best_c = 0, best_r = std::numeric_limits<double>::infinity();
    std::vector<double> best_res;
    for (int k = 0; k < budget; ++k) {
      const double c = -cmax + 2 * cmax * k / (budget - 1);
      const auto r = residuals_under(EnsembleDistribution::linear_tilt(packet, c));
      const double worst = max_of(r);
      if (worst < best_r) {
        best_r = worst;
        best_c = c;
        best_res = r;
      }
    }
    res.candidate = EnsembleDistribution::linear_tilt(packet, best_c).describe();
    res.residuals = best_res;
    res.max_residual = best_r;
    res.is_equilibrium = best_c == 0.0;
    return res;
  }

  if (family == "grid-weights") {
    // the trivial balancing construction: support the distribution on the
    // union of the two transition sets of the first triple, proportional to
    // the equilibrium measure there; the sets have equal equilibrium mass
    const ThetaTriple& t0 = triples.front();
    const SpinAmplitudes a0 = singlet_amplitudes({t0.theta_a, t0.theta_b});
    const SpinAmplitudes a1 = singlet_amplitudes({t0.theta_a, t0.theta_b_prime});
    const int m = std::max(16, std::min(method.m, 256));
    std::vector<double> w(static_cast<std::size_t>(m) * m, 0.0);
    const double hw = packet.width / 2, cell = packet.width / m;
    for (int row = 0; row < m; ++row)
      for (int col = 0; col < m; ++col) {
        const HiddenVariable l{-hw + (col + 0.5) * cell, -hw + (row + 0.5) * cell};
        const int o0 = classify_outcome(l, a0, couplings, packet).sigma_a;
        const int o1 = classify_outcome(l, a1, couplings, packet).sigma_a;
        if (o0 != o1) w[static_cast<std::size_t>(row) * m + col] = 1.0;
      }
    const EnsembleDistribution cand = EnsembleDistribution::grid_weights(packet, m, std::move(w));
    res.candidate = cand.describe();
    res.residuals = residuals_under(cand);
    res.max_residual = max_of(res.residuals);
    return res;
  }

  throw std::invalid_argument("unknown family: " + family +
                              " (expected linear-tilt or grid-weights)");
}

}  // namespace eprsim
