#include "eprsim/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>

#include "eprsim/nonlocality.hpp"
#include "eprsim/trajectory.hpp"

namespace eprsim {

namespace {

constexpr std::uint64_t kBaseSeed = 42;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 20 reproducible random setting triples in (-pi, pi)
std::vector<ThetaTriple> random_triples(std::uint64_t seed, int count) {
  std::vector<ThetaTriple> out;
  for (int k = 0; k < count; ++k) {
    CounterRng rng = CounterRng::at(seed, static_cast<std::uint64_t>(k));
    out.push_back({rng.next_in(-kPi, kPi), rng.next_in(-kPi, kPi), rng.next_in(-kPi, kPi)});
  }
  return out;
}

using CriterionFn = std::function<void(Check&)>;

const PacketSpec kPacket{};                 // delta = 1
const CouplingProfile kEqual{1.0, 1.0};
const CouplingProfile kAsym{2.0, 1.0};

// ---- criteria ----

void criterion_correlation(Check& c) {
  const EnsembleDistribution eq = EnsembleDistribution::equilibrium(kPacket);
  for (int k = 0; k < 12; ++k) {
    const double theta_a = -1.0 + 0.2 * k;
    const double delta = -kPi + (k + 0.5) * 2 * kPi / 12;
    const MeasurementSettings settings{theta_a, theta_a + delta};
    const OutcomeStatistics st = outcome_statistics(settings, StatePrep{}, kEqual, kPacket, eq,
                                                    Method::mc(200'000, kBaseSeed + k));
    const double want = -std::cos(delta);
    c.expect(std::abs(st.correlation - want) <= 3 * st.corr_err,
             "E[sAsB](delta=" + fmt(delta) + ")=" + fmt(st.correlation) + " want " + fmt(want) +
                 " +- " + fmt(3 * st.corr_err));
  }
}

void criterion_marginals(Check& c) {
  const EnsembleDistribution eq = EnsembleDistribution::equilibrium(kPacket);
  for (int k = 0; k < 12; ++k) {
    const double theta_a = -1.0 + 0.2 * k;
    const double delta = -kPi + (k + 0.5) * 2 * kPi / 12;
    const MeasurementSettings settings{theta_a, theta_a + delta};
    const CouplingProfile& cp = (k % 2 == 0) ? kEqual : kAsym;
    const OutcomeStatistics st = outcome_statistics(settings, StatePrep{}, cp, kPacket, eq,
                                                    Method::mc(200'000, kBaseSeed + 100 + k));
    c.expect(std::abs(st.p_a_plus - 0.5) <= 3 * st.p_a_err,
             "P(sA=+1)(k=" + fmt(k) + ")=" + fmt(st.p_a_plus));
    c.expect(std::abs(st.p_b_plus - 0.5) <= 3 * st.p_b_err,
             "P(sB=+1)(k=" + fmt(k) + ")=" + fmt(st.p_b_plus));
  }
}

TransitionReport run_degree(TransitionKind kind, double delta, const CouplingProfile& cp) {
  const EnsembleDistribution eq = EnsembleDistribution::equilibrium(kPacket);
  return transition_fractions(kind, 0.0, 0.0, delta, StatePrep{}, cp, kPacket, eq,
                              Method::grid(1000));
}

void criterion_quarter(Check& c) {
  const TransitionReport a = run_degree(TransitionKind::Alpha, kPi / 2, kEqual);
  const TransitionReport bt = run_degree(TransitionKind::BetaTilde, kPi / 2, kEqual);
  c.expect(std::abs(a.degree - 0.25) <= 5e-3, "alpha(0,0,pi/2)=" + fmt(a.degree));
  c.expect(std::abs(bt.degree - 0.25) <= 5e-3, "beta~(0,0,pi/2)=" + fmt(bt.degree));
}

const std::vector<double> kDeltaGrid = {kPi / 6, kPi / 4, kPi / 3, kPi / 2, 2 * kPi / 3, kPi};

void criterion_cosine_law(Check& c) {
  for (double d : kDeltaGrid) {
    const double want = 0.25 * (1 - std::cos(d));
    const double a = run_degree(TransitionKind::Alpha, d, kEqual).degree;
    const double bt = run_degree(TransitionKind::BetaTilde, d, kEqual).degree;
    c.expect(std::abs(a - want) <= 5e-3, "alpha(0,0," + fmt(d) + ")=" + fmt(a));
    c.expect(std::abs(bt - want) <= 5e-3, "beta~(0,0," + fmt(d) + ")=" + fmt(bt));
  }
}

void criterion_half(Check& c) {
  const double a = run_degree(TransitionKind::Alpha, kPi, kEqual).degree;
  c.expect(std::abs(a - 0.5) <= 5e-3, "alpha(0,0,pi)=" + fmt(a));
}

void criterion_asymmetric(Check& c) {
  const double a = run_degree(TransitionKind::Alpha, kPi / 2, kAsym).degree;
  const double bt = run_degree(TransitionKind::BetaTilde, kPi / 2, kAsym).degree;
  c.expect(std::abs(a - 0.125) <= 5e-3, "alpha(0,0,pi/2|aA=2aB)=" + fmt(a));
  c.expect(std::abs(bt - 0.375) <= 5e-3, "beta~(0,0,pi/2|aA=2aB)=" + fmt(bt));
}

void criterion_extreme_ratio(Check& c) {
  const CouplingProfile fast_a{100.0, 1.0};
  const CouplingProfile fast_b{1.0, 100.0};
  const double a = run_degree(TransitionKind::Alpha, kPi / 2, fast_a).degree;
  const double bt = run_degree(TransitionKind::BetaTilde, kPi / 2, fast_a).degree;
  const double a_swapped = run_degree(TransitionKind::Alpha, kPi / 2, fast_b).degree;
  c.expect(a <= 0.01, "alpha(aA/aB=100)=" + fmt(a));
  c.expect(std::abs(bt - 0.5) <= 0.01, "beta~(aA/aB=100)=" + fmt(bt));
  c.expect(std::abs(a_swapped - 0.5) <= 0.01, "alpha(aB/aA=100)=" + fmt(a_swapped));
}

void criterion_detailed_balance(Check& c) {
  const auto triples = random_triples(kBaseSeed + 7, 20);
  int k = 0;
  for (const ThetaTriple& t : triples) {
    for (const CouplingProfile& cp : {kEqual, kAsym}) {
      const DetailedBalanceReport db =
          detailed_balance_check(TransitionKind::Alpha, t.theta_a, t.theta_b, t.theta_b_prime, cp,
                                 kPacket, Method::mc(250'000, kBaseSeed + 200 + k));
      c.expect(db.difference <= 3 * db.std_error,
               "triple " + fmt(k) + ": |nu+- - nu-+|=" + fmt(db.difference) + " > 3*" +
                   fmt(db.std_error));
      ++k;
    }
  }
}

void criterion_no_signaling(Check& c) {
  const auto triples = random_triples(kBaseSeed + 7, 20);
  const EnsembleDistribution eq = EnsembleDistribution::equilibrium(kPacket);
  int k = 0;
  for (const ThetaTriple& t : triples) {
    const SignalReport s =
        signal(TransitionKind::Alpha, t.theta_a, t.theta_b, t.theta_b_prime, kEqual, kPacket, eq,
               Method::mc(250'000, kBaseSeed + 320 + k));
    c.expect(std::abs(s.signal) <= 3 * s.std_error,
             "triple " + fmt(k) + ": signal=" + fmt(s.signal) + " > 3*" + fmt(s.std_error));
    ++k;
  }
}

void criterion_nonequilibrium_signal(Check& c) {
  // pre-registered value: with sigma_A = +1 exactly on {r_B < r_A} before and
  // {r_A > 0} after, the right half-square gains nu(-,+) = 2 * area{r_A > 0,
  // r_B > r_A} = 1/4 and loses nothing, so the signal is +0.25
  constexpr double kExpected = 0.25;
  const EnsembleDistribution right =
      EnsembleDistribution::half_square(kPacket, HalfSquareSide::Right);
  const SignalReport mc = signal(TransitionKind::Alpha, 0.0, 0.0, kPi / 2, kEqual, kPacket, right,
                                 Method::mc(1'000'000, kBaseSeed));
  c.expect(std::abs(mc.signal) >= 10 * mc.std_error,
           "signal " + fmt(mc.signal) + " below 10x standard error " + fmt(mc.std_error));
  const SignalReport grid = signal(TransitionKind::Alpha, 0.0, 0.0, kPi / 2, kEqual, kPacket,
                                   right, Method::grid(2000));
  c.expect(std::abs(grid.signal - kExpected) <= 5e-3,
           "grid signal=" + fmt(grid.signal) + " want " + fmt(kExpected));
}

void criterion_bound_saturation(Check& c) {
  for (const CouplingProfile& cp : {kEqual, kAsym}) {
    const double a = run_degree(TransitionKind::Alpha, kPi / 2, cp).degree;
    const double bt = run_degree(TransitionKind::BetaTilde, kPi / 2, cp).degree;
    BoundInputs in;
    in.alpha = a;
    in.beta_tilde = bt;
    const BoundCheck b = bound_check(1, 0.0, 0.0, kPi / 2, in, cp);
    c.expect(std::abs(b.gap) <= 1e-2,
             "bound-1 gap=" + fmt(b.gap) + " (aA=" + fmt(cp.a_a) + ")");
  }
  for (double d : kDeltaGrid) {
    BoundInputs in;
    in.alpha = run_degree(TransitionKind::Alpha, d, kEqual).degree;
    const BoundCheck b = bound_check(5, 0.0, 0.0, d, in, kEqual);
    c.expect(std::abs(b.gap) <= 1e-2, "bound-5 gap(" + fmt(d) + ")=" + fmt(b.gap));
  }
}

void criterion_perturbation_expansion(Check& c) {
  const std::vector<double> eps = {0.01, 0.02, 0.03, 0.04, 0.05};
  const EntanglementSweepResult sweep =
      entanglement_sweep(eps, {kPi}, kEqual, kPacket, Method::columns(2000, 257));
  c.expect(sweep.fit_at_pi.has_value(), "fit missing");
  if (sweep.fit_at_pi) {
    c.expect(std::abs(sweep.fit_at_pi->coeff - (-1.25)) <= 0.07,
             "quadratic coefficient=" + fmt(sweep.fit_at_pi->coeff) + " want -1.25 +- 0.07");
    c.expect(std::abs(sweep.fit_at_pi->intercept - 0.5) <= 1e-3,
             "intercept=" + fmt(sweep.fit_at_pi->intercept) + " want 0.5 +- 1e-3");
  }
}

void criterion_bits(Check& c) {
  c.expect(std::abs(nonlocal_bits(-kPi, kPi) - 0.25) <= 1e-9,
           "bits(-pi,pi)=" + fmt(nonlocal_bits(-kPi, kPi)));
  const double want = 0.25 * (1 - 2 / kPi);
  c.expect(std::abs(nonlocal_bits(-kPi / 2, kPi / 2) - want) <= 1e-9,
           "bits(-pi/2,pi/2)=" + fmt(nonlocal_bits(-kPi / 2, kPi / 2)));
}

void criterion_single_spin(Check& c) {
  for (int k = 0; k < 101; ++k) {
    const double r0 = -0.5 + (k + 0.5) / 101.0;
    c.expect(single_spin_outcome(r0, SingleSpinState::ZPlus, 0.0, 1.0) == +1, "z+ theta=0");
    c.expect(single_spin_outcome(r0, SingleSpinState::ZPlus, kPi, 1.0) == -1, "z+ theta=pi");
    const int want = r0 >= 0 ? +1 : -1;
    c.expect(single_spin_outcome(r0, SingleSpinState::XPlus, 0.0, 1.0) == want, "x+ theta=0");
    c.expect(single_spin_outcome(r0, SingleSpinState::XPlus, kPi, 1.0) == want, "x+ theta=pi");
  }
  // non-crossing on an ordered grid
  std::vector<SingleSpinTrajectory> trs;
  for (int k = 0; k < 100; ++k)
    trs.push_back(evolve_single_spin(-0.5 + (k + 0.5) / 100.0, SingleSpinState::XPlus, kPi / 3,
                                     1.0));
  for (double t : {0.1, 0.25, 0.5, 0.75, 1.0, 2.0}) {
    for (std::size_t k = 1; k < trs.size(); ++k)
      c.expect(trs[k - 1].at(t) <= trs[k].at(t) + 1e-12, "crossing at t=" + fmt(t));
  }
}

void criterion_property_suite(Check& c) {
  struct Scenario {
    double delta;
    CouplingProfile cp;
  };
  const Scenario scenarios[6] = {{0.0, kEqual},      {kPi / 3, kEqual}, {kPi / 2, kEqual},
                                 {kPi, kEqual},      {kPi / 2, kAsym},  {kPi / 3, {1.0, 2.0}}};
  int sc = 0;
  for (const Scenario& s : scenarios) {
    const SpinAmplitudes amps = singlet_amplitudes({0.0, s.delta});
    const double dt = kPacket.width / (1000.0 * std::max(s.cp.a_a, s.cp.a_b));
    int agree = 0;
    const int n = 10'000;
    for (int i = 0; i < n; ++i) {
      CounterRng rng = CounterRng::at(kBaseSeed + 400 + sc, static_cast<std::uint64_t>(i));
      const HiddenVariable l{rng.next_in(-0.5, 0.5), rng.next_in(-0.5, 0.5)};
      const OutcomePair exact = classify_outcome(l, amps, s.cp, kPacket);
      const OutcomePair numeric = evolve_numeric(l, amps, s.cp, kPacket, dt).outcome;
      agree += exact == numeric;
    }
    c.expect(agree >= n * 999 / 1000,
             "oracle agreement " + fmt(agree) + "/10000 (scenario " + fmt(sc) + ")");
    ++sc;
  }
  // scale equivariance: common rescaling of (delta, a_A, a_B, lambda)
  for (double s : {2.0, 0.5, 3.0}) {
    const SpinAmplitudes amps = singlet_amplitudes({0.0, kPi / 3});
    int mism = 0;
    for (int i = 0; i < 2000; ++i) {
      CounterRng rng = CounterRng::at(kBaseSeed + 500, static_cast<std::uint64_t>(i));
      const HiddenVariable l{rng.next_in(-0.5, 0.5), rng.next_in(-0.5, 0.5)};
      const OutcomePair base = classify_outcome(l, amps, kAsym, kPacket);
      const OutcomePair scaled = classify_outcome({l.r_a0 * s, l.r_b0 * s}, amps,
                                                  {kAsym.a_a * s, kAsym.a_b * s},
                                                  PacketSpec{kPacket.width * s});
      mism += !(base == scaled);
    }
    c.expect(mism == 0, "scale equivariance broken at s=" + fmt(s) + " (" + fmt(mism) + ")");
  }
  for (double g : {kPi / 12, kPi / 6, kPi / 4}) {
    const CircleRunReport rep = circle_model_run(g, DiscDistribution::Uniform, Method::grid(2000));
    const double want = g / (2 * kPi);
    c.expect(std::abs(rep.nu_plus_minus - want) <= rep.std_error,
             "circle nu+-(" + fmt(g) + ")=" + fmt(rep.nu_plus_minus));
    c.expect(std::abs(rep.nu_minus_plus - want) <= rep.std_error,
             "circle nu-+(" + fmt(g) + ")=" + fmt(rep.nu_minus_plus));
    c.expect(std::abs(rep.p_plus_before - 0.5) <= rep.std_error, "circle ratio before");
    c.expect(std::abs(rep.p_plus_after - 0.5) <= rep.std_error, "circle ratio after");
  }
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* progress) {
  struct Entry {
    int id;
    const char* name;
    CriterionFn fn;
  };
  const Entry entries[] = {
      {1, "singlet correlation -cos(thetaA-thetaB)", criterion_correlation},
      {2, "equilibrium marginals 1/2", criterion_marginals},
      {3, "alpha = beta~ = 1/4 at (0,0,pi/2)", criterion_quarter},
      {4, "alpha = beta~ = (1-cos d)/4 on delta grid", criterion_cosine_law},
      {5, "alpha(0,0,pi) = 1/2", criterion_half},
      {6, "asymmetric couplings: 1/8 and 3/8", criterion_asymmetric},
      {7, "extreme coupling ratio limits", criterion_extreme_ratio},
      {8, "detailed balancing on random triples", criterion_detailed_balance},
      {9, "equilibrium no-signaling", criterion_no_signaling},
      {10, "nonequilibrium signal = 1/4", criterion_nonequilibrium_signal},
      {11, "bounds (1) and (5) saturated", criterion_bound_saturation},
      {12, "perturbation expansion 1/2 - (5/4)eps^2", criterion_perturbation_expansion},
      {13, "mean nonlocal bits 0.25 and (1-2/pi)/4", criterion_bits},
      {14, "single-spin model", criterion_single_spin},
      {15, "oracle agreement, equivariance, circle wedges", criterion_property_suite},
  };

  std::vector<CriterionResult> results;
  for (const Entry& e : entries) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      e.fn(c);
    } catch (const std::exception& ex) {
      c.ok = false;
      c.detail << "exception: " << ex.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    r.pass = c.ok;
    r.detail = c.detail.str();
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    if (progress) {
      char line[64];
      std::snprintf(line, sizeof line, "[%2d] %s  (%.2fs)  ", r.id, r.pass ? "PASS" : "FAIL",
                    r.seconds);
      *progress << line << r.name;
      if (!r.pass) *progress << "\n     " << r.detail;
      *progress << std::endl;
    }
    results.push_back(std::move(r));
  }
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const CriterionResult& r : results)
    if (!r.pass) return false;
  return !results.empty();
}

}  // namespace eprsim
