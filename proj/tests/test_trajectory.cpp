#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "eprsim/rng.hpp"
#include "eprsim/trajectory.hpp"

using namespace eprsim;

namespace {

const PacketSpec kPacket{};
const CouplingProfile kEqual{1.0, 1.0};

OutcomePair run(double x, double y, double delta, const CouplingProfile& cp = kEqual) {
  return classify_outcome({x, y}, singlet_amplitudes({0.0, delta}), cp, kPacket);
}

}  // namespace

TEST_CASE("aligned settings: the diagonal divides the outcomes") {
  CHECK(run(-0.2, 0.3, 0.0) == OutcomePair{-1, +1});   // above r_B = r_A
  CHECK(run(0.3, -0.2, 0.0) == OutcomePair{+1, -1});   // below
  CHECK(run(0.1, 0.4, 0.0) == OutcomePair{-1, +1});
  CHECK(run(0.0, 0.0, 0.0) == OutcomePair{+1, -1});    // boundary convention: diagonal counts below
  CHECK(run(-0.37, -0.37, 0.0) == OutcomePair{+1, -1});
}

TEST_CASE("orthogonal settings: quadrants decide") {
  CHECK(run(0.2, 0.3, kPi / 2) == OutcomePair{+1, +1});
  CHECK(run(0.2, -0.3, kPi / 2) == OutcomePair{+1, -1});
  CHECK(run(-0.2, 0.3, kPi / 2) == OutcomePair{-1, +1});
  CHECK(run(-0.2, -0.3, kPi / 2) == OutcomePair{-1, -1});
}

TEST_CASE("intermediate setting: top-right quadrant splits at cos-delta lines") {
  const double d = kPi / 3;  // cos d = 1/2
  // between r_B = r_A/2 and r_B = 2 r_A: stays (+1, +1)
  CHECK(run(0.3, 0.2, d) == OutcomePair{+1, +1});
  // below r_B = r_A cos d: crosses into the bottom-right quadrant
  CHECK(run(0.3, 0.1, d) == OutcomePair{+1, -1});
  // above r_B = r_A / cos d: crosses into the top-left quadrant
  CHECK(run(0.2, 0.45, d) == OutcomePair{-1, +1});
}

TEST_CASE("unequal couplings: three-segment divider") {
  const CouplingProfile cp{2.0, 1.0};
  // divider for r_A < 0 is r_B = r_A/2 - 1/4; at r_A = -1/4 that is -3/8
  CHECK(run(-0.25, -0.375 + 1e-3, 0.0, cp) == OutcomePair{-1, +1});
  CHECK(run(-0.25, -0.375 - 1e-3, 0.0, cp) == OutcomePair{+1, -1});
  CHECK(run(-0.25, 0.125 + 1e-6, 0.0, cp) == OutcomePair{-1, +1});
  // vertical segment at r_A = 0, |r_B| < 1/4
  CHECK(run(1e-9, 0.1, 0.0, cp) == OutcomePair{+1, -1});
  CHECK(run(-1e-9, 0.1, 0.0, cp) == OutcomePair{-1, +1});
  // divider for r_A > 0 is r_B = r_A/2 + 1/4
  CHECK(run(0.25, 0.375 + 1e-3, 0.0, cp) == OutcomePair{-1, +1});
  CHECK(run(0.25, 0.375 - 1e-3, 0.0, cp) == OutcomePair{+1, -1});
}

TEST_CASE("trajectories are deterministic and kinematically sane") {
  const SpinAmplitudes amps = singlet_amplitudes({0.0, kPi / 3});
  const CouplingProfile cp{1.7, 0.6};
  CounterRng rng = CounterRng::at(3, 0);
  for (int k = 0; k < 40; ++k) {
    const HiddenVariable l{rng.next_in(-0.5, 0.5), rng.next_in(-0.5, 0.5)};
    const Trajectory t1 = evolve_exact(l, amps, cp, kPacket);
    const Trajectory t2 = evolve_exact(l, amps, cp, kPacket);
    REQUIRE(t1.points.size() == t2.points.size());
    for (std::size_t i = 0; i < t1.points.size(); ++i) {
      CHECK(t1.points[i].t == t2.points[i].t);
      CHECK(t1.points[i].r_a == t2.points[i].r_a);
      CHECK(t1.points[i].r_b == t2.points[i].r_b);
    }
    CHECK(t1.outcome == t2.outcome);
    for (std::size_t i = 1; i < t1.points.size(); ++i) {
      const auto &p = t1.points[i - 1], &q = t1.points[i];
      CHECK(q.t > p.t);
      CHECK(std::abs(q.r_a - p.r_a) <= cp.a_a * (q.t - p.t) + 1e-12);
      CHECK(std::abs(q.r_b - p.r_b) <= cp.a_b * (q.t - p.t) + 1e-12);
    }
    // outcome equals the pointer signs at termination
    CHECK(t1.outcome.sigma_a == (t1.points.back().r_a >= 0 ? +1 : -1));
    CHECK(t1.outcome.sigma_b == (t1.points.back().r_b >= 0 ? +1 : -1));
    CHECK(t1.points.back().t >= kPacket.width / std::min(cp.a_a, cp.a_b));
  }
}

TEST_CASE("scale equivariance") {
  const SpinAmplitudes amps = singlet_amplitudes({0.0, 2 * kPi / 3});
  CounterRng rng = CounterRng::at(5, 0);
  for (double s : {2.0, 0.5}) {
    for (int k = 0; k < 60; ++k) {
      const HiddenVariable l{rng.next_in(-0.5, 0.5), rng.next_in(-0.5, 0.5)};
      const Trajectory base = evolve_exact(l, amps, {2.0, 1.0}, kPacket);
      const Trajectory scaled = evolve_exact({l.r_a0 * s, l.r_b0 * s}, amps, {2.0 * s, 1.0 * s},
                                             PacketSpec{s});
      CHECK(base.outcome == scaled.outcome);
      REQUIRE(base.points.size() == scaled.points.size());
      for (std::size_t i = 0; i < base.points.size(); ++i) {
        CHECK(scaled.points[i].t == doctest::Approx(base.points[i].t).epsilon(1e-12));
        CHECK(scaled.points[i].r_a == doctest::Approx(base.points[i].r_a * s).epsilon(1e-12));
        CHECK(scaled.points[i].r_b == doctest::Approx(base.points[i].r_b * s).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("numeric integrator agrees with the event engine") {
  const SpinAmplitudes amps = singlet_amplitudes({0.0, kPi / 3});
  const double dt = kPacket.width / 1000.0;
  int agree = 0;
  const int n = 300;
  CounterRng rng = CounterRng::at(9, 0);
  for (int k = 0; k < n; ++k) {
    const HiddenVariable l{rng.next_in(-0.5, 0.5), rng.next_in(-0.5, 0.5)};
    const OutcomePair a = classify_outcome(l, amps, kEqual, kPacket);
    const OutcomePair b = evolve_numeric(l, amps, kEqual, kPacket, dt).outcome;
    agree += a == b;
  }
  CHECK(agree >= n - 3);
}

TEST_CASE("numeric integrator edge cases") {
  const SpinAmplitudes amps = singlet_amplitudes({0.0, 0.0});
  const Trajectory zero = evolve_numeric({0.2, -0.1}, amps, kEqual, kPacket, 0.01, 0.0);
  REQUIRE(zero.points.size() == 1);  // zero-duration evolution: the initial point
  CHECK(zero.points[0].r_a == 0.2);
  CHECK(zero.points[0].r_b == -0.1);
  CHECK_THROWS_AS(evolve_numeric({0.2, -0.1}, amps, kEqual, kPacket, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(classify_outcome({0.7, 0.0}, amps, kEqual, kPacket), std::invalid_argument);
}

TEST_CASE("trajectory CSV dump") {
  const Trajectory tr =
      evolve_exact({0.1, -0.3}, singlet_amplitudes({0.0, kPi / 2}), kEqual, kPacket);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  const std::string s = os.str();
  CHECK(s.rfind("t,r_A,r_B,region_id\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(tr.points.size()) + 1);
}

TEST_CASE("single-spin model outcomes") {
  for (double r0 : {-0.31, -0.07, 0.0, 0.18, 0.49}) {
    CHECK(single_spin_outcome(r0, SingleSpinState::ZPlus, 0.0, 1.0) == +1);
    CHECK(single_spin_outcome(r0, SingleSpinState::ZPlus, kPi, 1.0) == -1);
    const int sign = r0 >= 0 ? +1 : -1;
    CHECK(single_spin_outcome(r0, SingleSpinState::XPlus, 0.0, 1.0) == sign);
    CHECK(single_spin_outcome(r0, SingleSpinState::XPlus, kPi, 1.0) == sign);
  }
}

TEST_CASE("single-spin trajectories do not cross") {
  std::vector<SingleSpinTrajectory> trs;
  for (int k = 0; k < 60; ++k)
    trs.push_back(
        evolve_single_spin(-0.5 + (k + 0.5) / 60.0, SingleSpinState::XPlus, kPi / 5, 0.8));
  for (double t : {0.0, 0.3, 0.8, 1.6, 3.0}) {
    for (std::size_t k = 1; k < trs.size(); ++k)
      CHECK(trs[k - 1].at(t) <= trs[k].at(t) + 1e-12);
  }
}

TEST_CASE("single-spin Born fractions") {
  // |z+> measured along theta: P(+1) = cos^2(theta/2), realized as the
  // fraction of initial positions ending positive
  const double theta = 2 * kPi / 5;
  int plus = 0;
  const int n = 20'000;
  for (int k = 0; k < n; ++k) {
    const double r0 = -0.5 + (k + 0.5) / n;
    plus += single_spin_outcome(r0, SingleSpinState::ZPlus, theta, 1.0) == +1;
  }
  const double want = std::cos(theta / 2) * std::cos(theta / 2);
  CHECK(static_cast<double>(plus) / n == doctest::Approx(want).epsilon(2e-4));
}
