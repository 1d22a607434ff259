#include <doctest.h>

#include "eprsim/nonlocality.hpp"
#include "eprsim/rng.hpp"

using namespace eprsim;

namespace {
const PacketSpec kPacket{};
const CouplingProfile kEqual{1.0, 1.0};
const CouplingProfile kAsym{2.0, 1.0};
const EnsembleDistribution kEq = EnsembleDistribution::equilibrium(kPacket);
}  // namespace

TEST_CASE("outcome statistics reproduce the quantum correlation") {
  for (double d : {kPi / 6, kPi / 2, 2 * kPi / 3}) {
    const OutcomeStatistics st =
        outcome_statistics({0.4, 0.4 + d}, StatePrep{}, kEqual, kPacket, kEq, Method::grid(500));
    CHECK(st.correlation == doctest::Approx(-std::cos(d)).epsilon(5e-3));
    CHECK(st.p_a_plus == doctest::Approx(0.5).epsilon(5e-3));
    CHECK(st.p_b_plus == doctest::Approx(0.5).epsilon(5e-3));
  }
  // a point mass concentrates on one outcome pair
  const EnsembleDistribution pm = EnsembleDistribution::point_mass(kPacket, {0.2, -0.3});
  const OutcomeStatistics st =
      outcome_statistics({0.0, 0.0}, StatePrep{}, kEqual, kPacket, pm, Method::mc(100, 5));
  CHECK(st.p_a_plus == 1.0);
  CHECK(st.p_b_plus == 0.0);
  CHECK(st.correlation == -1.0);
}

TEST_CASE("transition fractions at the reference shift") {
  const TransitionReport r = transition_fractions(TransitionKind::Alpha, 0, 0, kPi / 2,
                                                  StatePrep{}, kEqual, kPacket, kEq,
                                                  Method::grid(1000));
  CHECK(r.wing == 'A');
  CHECK(r.nu_plus_minus == doctest::Approx(0.125).epsilon(2e-3));
  CHECK(r.nu_minus_plus == doctest::Approx(0.125).epsilon(2e-3));
  CHECK(r.degree == doctest::Approx(0.25).epsilon(2e-3));
  CHECK(r.degree == r.nu_plus_minus + r.nu_minus_plus);

  const TransitionReport none = transition_fractions(TransitionKind::Alpha, 0, 0, 0.0,
                                                     StatePrep{}, kEqual, kPacket, kEq,
                                                     Method::grid(400));
  CHECK(none.degree == 0.0);
}

TEST_CASE("local fraction with unequal couplings") {
  const TransitionReport bt = transition_fractions(TransitionKind::BetaTilde, 0, 0, kPi / 2,
                                                   StatePrep{}, kAsym, kPacket, kEq,
                                                   Method::grid(1000));
  CHECK(bt.wing == 'B');
  CHECK(bt.degree == doctest::Approx(0.375).epsilon(2e-3));
  const TransitionReport a = transition_fractions(TransitionKind::Alpha, 0, 0, kPi / 2,
                                                  StatePrep{}, kAsym, kPacket, kEq,
                                                  Method::grid(1000));
  CHECK(a.degree == doctest::Approx(0.125).epsilon(2e-3));
}

TEST_CASE("exchange symmetry: beta(0,0,-d) = alpha(0,0,d) with equal couplings") {
  for (double d : {kPi / 4, kPi / 2, 2 * kPi / 3}) {
    const double alpha = transition_fractions(TransitionKind::Alpha, 0, 0, d, StatePrep{},
                                              kEqual, kPacket, kEq, Method::grid(600))
                             .degree;
    const double beta = transition_fractions(TransitionKind::Beta, 0, 0, -d, StatePrep{},
                                             kEqual, kPacket, kEq, Method::grid(600))
                            .degree;
    CHECK(beta == doctest::Approx(alpha).epsilon(4e-3));
    CHECK(alpha == doctest::Approx(0.25 * (1 - std::cos(d))).epsilon(4e-3));
  }
}

TEST_CASE("detailed balancing") {
  const DetailedBalanceReport db = detailed_balance_check(
      TransitionKind::Alpha, 0, 0, kPi / 2, kEqual, kPacket, Method::grid(800));
  CHECK(db.difference <= 3 * db.std_error + 1e-12);
  CounterRng rng = CounterRng::at(55, 0);
  for (int k = 0; k < 16; ++k) {
    const double ta = rng.next_in(-kPi, kPi), tb = rng.next_in(-kPi, kPi),
                 tbp = rng.next_in(-kPi, kPi);
    const CouplingProfile& cp = k % 2 ? kAsym : kEqual;
    const DetailedBalanceReport r = detailed_balance_check(
        TransitionKind::Alpha, ta, tb, tbp, cp, kPacket, Method::mc(100'000, 600 + k));
    CHECK(r.difference <= 3 * r.std_error);
  }
}

TEST_CASE("signals: equilibrium silent, nonequilibrium loud") {
  const SignalReport eq_sig = signal(TransitionKind::Alpha, 0.3, -0.8, 1.1, kEqual, kPacket, kEq,
                                     Method::mc(200'000, 12));
  CHECK(std::abs(eq_sig.signal) <= 3 * eq_sig.std_error);
  CHECK(eq_sig.p_plus_before == doctest::Approx(0.5).epsilon(5e-3));

  const EnsembleDistribution right =
      EnsembleDistribution::half_square(kPacket, HalfSquareSide::Right);
  const SignalReport s = signal(TransitionKind::Alpha, 0, 0, kPi / 2, kEqual, kPacket, right,
                                Method::grid(2000));
  // frozen grid-oracle value: the right half-square gains exactly the mass of
  // {r_A > 0, r_B > r_A} and loses nothing, so the signal is 2 * 1/8 = 0.25
  CHECK(s.signal == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(s.p_plus_before == doctest::Approx(0.75).epsilon(1e-3));
  CHECK(s.p_plus_after == doctest::Approx(1.0).epsilon(1e-3));

  // a distribution supported inside T_A(+,-) flips every outcome
  const EnsembleDistribution inside =
      EnsembleDistribution::sub_rectangle(kPacket, -0.45, -0.35, -0.5, -0.46);
  const SignalReport flip = signal(TransitionKind::Alpha, 0, 0, kPi / 2, kEqual, kPacket, inside,
                                   Method::mc(20'000, 3));
  CHECK(flip.signal == doctest::Approx(-1.0));
  CHECK(flip.transitions.nu_plus_minus == doctest::Approx(1.0));
  CHECK(flip.transitions.nu_minus_plus == doctest::Approx(0.0).scale(1));
}

TEST_CASE("bound checks") {
  BoundInputs in;
  in.alpha = 0.25;
  in.beta_tilde = 0.25;
  const BoundCheck b1 = bound_check(1, 0, 0, kPi / 2, in, kEqual);
  CHECK(b1.lhs == doctest::Approx(0.5));
  CHECK(b1.rhs == doctest::Approx(0.5));
  CHECK(b1.satisfied);
  CHECK(b1.warning.empty());

  in.alpha = 0.125;
  in.beta_tilde = 0.375;
  const BoundCheck b1a = bound_check(1, 0, 0, kPi / 2, in, kAsym);
  CHECK(b1a.gap == doctest::Approx(0.0).scale(1));

  BoundInputs in5;
  in5.alpha = 0.25;
  const BoundCheck b5 = bound_check(5, 0, 0, kPi / 2, in5, kEqual);
  CHECK(b5.rhs == doctest::Approx(0.25));
  CHECK(b5.satisfied);
  const BoundCheck warned = bound_check(4, 0.1, 0.2, kPi / 3, in5, kAsym);
  CHECK(!warned.warning.empty());
  CHECK_THROWS_AS(bound_check(3, 0.1, 0.0, kPi / 2, in, kEqual), std::invalid_argument);
  CHECK_THROWS_AS(bound_check(6, 0, 0, 1.0, in, kEqual), std::invalid_argument);
  CHECK_THROWS_AS(bound_check(2, 0, 0, 1.0, BoundInputs{}, kEqual), std::invalid_argument);
}

TEST_CASE("bound 3 in the strong-coupling limit") {
  const CouplingProfile fast_a{100.0, 1.0};
  const double alpha = transition_fractions(TransitionKind::Alpha, 0, 0, kPi / 2, StatePrep{},
                                            fast_a, kPacket, kEq, Method::grid(800))
                           .degree;
  const double beta = transition_fractions(TransitionKind::Beta, 0, 0, -kPi / 2, StatePrep{},
                                           fast_a, kPacket, kEq, Method::grid(800))
                          .degree;
  CHECK(alpha <= 0.01);
  CHECK(beta == doctest::Approx(0.5).epsilon(2e-2));
  BoundInputs in;
  in.alpha = alpha;
  in.beta = beta;
  const BoundCheck b3 = bound_check(3, 0, 0, kPi / 2, in, fast_a, 1e-2);
  CHECK(b3.rhs == doctest::Approx(0.5));  // (1 - cos(pi/2)) / 2
  CHECK(b3.satisfied);
  CHECK(std::abs(b3.gap) <= 1e-2);  // alpha + beta stays 1/2, saturating the bound
}

TEST_CASE("mean nonlocal bits") {
  CHECK(nonlocal_bits(-kPi, kPi) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(nonlocal_bits(-kPi / 2, kPi / 2) ==
        doctest::Approx(0.25 * (1 - 2 / kPi)).epsilon(1e-12));
  CHECK(nonlocal_bits(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(nonlocal_bits(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("stern-gerlach identification of settings differing by pi") {
  const TransitionReport r =
      transition_fractions(TransitionKind::Alpha, 0, 0, kPi, StatePrep{}, kEqual, kPacket, kEq,
                           Method::grid(300), InteractionMode::SternGerlach);
  CHECK(r.degree == 0.0);  // pi is identified with 0: nothing shifts
  const TransitionReport vn =
      transition_fractions(TransitionKind::Alpha, 0, 0, kPi, StatePrep{}, kEqual, kPacket, kEq,
                           Method::grid(300), InteractionMode::VonNeumann);
  CHECK(vn.degree == doctest::Approx(0.5).epsilon(5e-3));
}

TEST_CASE("entanglement sweep") {
  const EntanglementSweepResult res = entanglement_sweep(
      {0.0}, {kPi / 3, kPi / 2, kPi}, kEqual, kPacket, Method::columns(500, 129));
  for (const SweepEntry& e : res.entries) {
    CHECK(std::abs(e.alpha - 0.25 * (1 - std::cos(e.delta))) < 2e-5);
  }
  REQUIRE(!res.fit_at_pi.has_value());  // no nonzero eps rows to fit

  const EntanglementSweepResult fit = entanglement_sweep(
      {0.02, 0.03, 0.04, 0.05}, {kPi}, kEqual, kPacket, Method::columns(600, 257));
  REQUIRE(fit.fit_at_pi.has_value());
  CHECK(fit.fit_at_pi->intercept == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(fit.fit_at_pi->coeff < -1.0);
  CHECK(fit.fit_at_pi->coeff > -1.4);
  CHECK_THROWS_AS(entanglement_sweep({0.01}, {kPi}, kAsym, kPacket, Method::grid(100)),
                  std::invalid_argument);
}

TEST_CASE("circle model") {
  const CircleRunReport u = circle_model_run(kPi / 6, DiscDistribution::Uniform,
                                             Method::grid(1500));
  CHECK(u.p_plus_before == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(u.p_plus_after == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(u.nu_plus_minus == doctest::Approx(kPi / 6 / (2 * kPi)).epsilon(3e-3));
  CHECK(u.nu_minus_plus == doctest::Approx(kPi / 6 / (2 * kPi)).epsilon(3e-3));

  // nonuniform: for gamma > 0 only the upper wedge transitions, and it flips
  // - to +, so the outcome ratio shifts upward
  const CircleRunReport h = circle_model_run(kPi / 6, DiscDistribution::UpperHalfUniform,
                                             Method::mc(200'000, 17));
  CHECK(h.nu_minus_plus == doctest::Approx(1.0 / 6).epsilon(2e-2));
  CHECK(h.nu_plus_minus == doctest::Approx(0.0).scale(1).epsilon(1e-3));
  CHECK(h.p_plus_after > h.p_plus_before);
  CHECK_THROWS_AS(circle_model_run(4.0, DiscDistribution::Uniform, Method::grid(100)),
                  std::invalid_argument);
}

TEST_CASE("balanced-distribution search") {
  const BalancedSearchResult none = balanced_distribution_search(
      {}, "linear-tilt", 5, kEqual, kPacket, Method::grid(200));
  CHECK(none.is_equilibrium);
  CHECK(none.max_residual == 0.0);

  const std::vector<ThetaTriple> one = {{0.0, 0.0, kPi / 2}};
  const BalancedSearchResult triv = balanced_distribution_search(
      one, "grid-weights", 1, kEqual, kPacket, Method::grid(400));
  CHECK(triv.residuals.size() == 1);
  CHECK(triv.max_residual <= 0.03);  // balancing construction, up to grid resolution

  const std::vector<ThetaTriple> two = {{0.0, 0.0, kPi / 2}, {0.4, -0.2, 1.0}};
  const BalancedSearchResult lt = balanced_distribution_search(
      two, "linear-tilt", 9, kEqual, kPacket, Method::grid(300));
  CHECK(lt.residuals.size() == 2);
  CHECK(lt.max_residual >= 0.0);
  CHECK_THROWS_AS(balanced_distribution_search(two, "nope", 5, kEqual, kPacket, Method::grid(100)),
                  std::invalid_argument);
}
