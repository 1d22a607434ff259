#include "eprsim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace eprsim {

namespace {

constexpr double kSign[2] = {+1.0, -1.0};

// Membership of a coordinate in the two moving bands of its axis. The + band
// is the support of the branches displacing upward, [-d/2 + h, d/2 + h); the
// - band is [-d/2 - h, d/2 - h). Kept symbolically: bands only ever lose the
// point (edges move at the extremal speeds), so no re-entry bookkeeping.
struct BandSet {
  bool pos = true;
  bool neg = true;

  int count() const { return int(pos) + int(neg); }
  int code() const { return (pos && neg) ? 0 : (pos ? 1 : 2); }
};

struct Stranded {};  // measure-zero tie left the point in a zero-density gap

struct StepState {
  double t = 0.0;
  double x = 0.0, y = 0.0;
  BandSet bx, by;
  double vx = 0.0, vy = 0.0;
  bool decided = false;
  int sa = 0, sb = 0;
};

// One exact evolution attempt. Calls on_breakpoint(state) at t=0 and after
// every region change; throws Stranded on a zero-density tie.
template <typename F>
void run_events(double x0, double y0, const Eigen::Matrix2d& w, double a_a, double a_b,
                double delta, F&& on_breakpoint) {
  StepState s;
  s.x = x0;
  s.y = y0;
  const double tol = 1e-12 * delta / std::max(a_a, a_b);

  for (int iter = 0; iter < 64; ++iter) {
    // covering branches and their velocity
    double den = 0.0, ja = 0.0, jb = 0.0;
    int seen_a = 0, seen_b = 0;  // bitmask of signs present with weight > 0
    for (int i = 0; i < 2; ++i) {
      if (!(i == 0 ? s.bx.pos : s.bx.neg)) continue;
      for (int j = 0; j < 2; ++j) {
        if (!(j == 0 ? s.by.pos : s.by.neg)) continue;
        const double wij = w(i, j);
        if (wij <= 0.0) continue;
        den += wij;
        ja += kSign[i] * wij;
        jb += kSign[j] * wij;
        seen_a |= 1 << i;
        seen_b |= 1 << j;
      }
    }
    if (den <= 0.0) throw Stranded{};
    s.vx = a_a * ja / den;
    s.vy = a_b * jb / den;
    if (iter == 0) on_breakpoint(s);

    if (seen_a != 3 && seen_b != 3) {
      s.decided = true;
      s.sa = (seen_a == 1) ? +1 : -1;
      s.sb = (seen_b == 1) ? +1 : -1;
      on_breakpoint(s);
      return;
    }

    // next exit events; + bands are left via their lower edge, - bands via
    // their upper edge (the other edges move away from the point)
    struct Exit {
      double dt;
      int axis;  // 0 = x, 1 = y
      bool pos_band;
    };
    Exit exits[4];
    int n_exits = 0;
    auto consider = [&](double c, double v, double h, double hv, const BandSet& b, int axis) {
      if (b.pos && hv - v > 0) {
        const double lower = -delta / 2 + h;
        exits[n_exits++] = {std::max(0.0, (c - lower) / (hv - v)), axis, true};
      }
      if (b.neg && v + hv > 0) {
        const double upper = delta / 2 - h;
        exits[n_exits++] = {std::max(0.0, (upper - c) / (v + hv)), axis, false};
      }
    };
    consider(s.x, s.vx, a_a * s.t, a_a, s.bx, 0);
    consider(s.y, s.vy, a_b * s.t, a_b, s.by, 1);
    if (n_exits == 0) throw Stranded{};  // cannot happen for positive couplings

    double dt = exits[0].dt;
    for (int k = 1; k < n_exits; ++k) dt = std::min(dt, exits[k].dt);
    for (int k = 0; k < n_exits; ++k) {
      if (exits[k].dt > dt + tol) continue;  // coalesce near-simultaneous events
      BandSet& b = exits[k].axis == 0 ? s.bx : s.by;
      (exits[k].pos_band ? b.pos : b.neg) = false;
    }
    if (s.bx.count() == 0 || s.by.count() == 0) throw Stranded{};
    s.x += s.vx * dt;
    s.y += s.vy * dt;
    s.t += dt;
    on_breakpoint(s);
  }
  throw std::logic_error("event stepping did not terminate");
}

// Measure-zero ties (a point exactly on an outcome divider) are broken by a
// fixed nudge biased toward the lower-inclusive side in r_A; the r_B
// component is scaled irrationally so repeated ties cannot survive.
constexpr double kNudge = 1e-13;
constexpr double kNudgeRatio = -0.6180339887498949;

template <typename F>
void run_events_nudged(const HiddenVariable& lambda, const Eigen::Matrix2d& w, double a_a,
                       double a_b, double delta, F&& on_breakpoint) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    const double eta = attempt == 0 ? 0.0 : kNudge * delta * std::pow(16.0, attempt - 1);
    try {
      run_events(lambda.r_a0 + eta, lambda.r_b0 + kNudgeRatio * eta, w, a_a, a_b, delta,
                 on_breakpoint);
      return;
    } catch (const Stranded&) {
      continue;
    }
  }
  throw std::runtime_error("evolution stranded on a measure-zero boundary");
}

void check_lambda(const HiddenVariable& lambda, const PacketSpec& packet) {
  const double hw = packet.width / 2;
  if (!(lambda.r_a0 >= -hw && lambda.r_a0 < hw && lambda.r_b0 >= -hw && lambda.r_b0 < hw))
    throw std::invalid_argument("hidden variable outside the initial square");
}

}  // namespace

Trajectory evolve_exact(const HiddenVariable& lambda, const SpinAmplitudes& amplitudes,
                        const CouplingProfile& couplings, const PacketSpec& packet) {
  check_lambda(lambda, packet);
  const Eigen::Matrix2d w = amplitudes.weights();
  Trajectory tr;
  run_events_nudged(lambda, w, couplings.a_a, couplings.a_b, packet.width,
                    [&](const StepState& s) {
                      const int region = 3 * s.bx.code() + s.by.code();
                      if (!tr.points.empty() && tr.points.back().t == s.t) {
                        tr.points.back() = {s.t, s.x, s.y, region};
                      } else {
                        tr.points.push_back({s.t, s.x, s.y, region});
                      }
                      if (s.decided) tr.outcome = {s.sa, s.sb};
                    });
  // extend to full branch separation with the terminal velocity
  const double t_sep = packet.width / std::min(couplings.a_a, couplings.a_b);
  const TrajectoryPoint& last = tr.points.back();
  if (last.t < t_sep) {
    const double dt = t_sep - last.t;
    tr.points.push_back({t_sep, last.r_a + tr.outcome.sigma_a * couplings.a_a * dt,
                         last.r_b + tr.outcome.sigma_b * couplings.a_b * dt, last.region});
  }
  return tr;
}

OutcomePair classify_outcome(const HiddenVariable& lambda, const SpinAmplitudes& amplitudes,
                             const CouplingProfile& couplings, const PacketSpec& packet) {
  check_lambda(lambda, packet);
  const Eigen::Matrix2d w = amplitudes.weights();
  OutcomePair out;
  run_events_nudged(lambda, w, couplings.a_a, couplings.a_b, packet.width,
                    [&](const StepState& s) {
                      if (s.decided) out = {s.sa, s.sb};
                    });
  return out;
}

Trajectory evolve_numeric(const HiddenVariable& lambda, const SpinAmplitudes& amplitudes,
                          const CouplingProfile& couplings, const PacketSpec& packet,
                          double dt, double t_end) {
  check_lambda(lambda, packet);
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (t_end < 0.0) t_end = packet.width / std::min(couplings.a_a, couplings.a_b);

  BranchState state{amplitudes, couplings, packet};
  Trajectory tr;
  double x = lambda.r_a0, y = lambda.r_b0, t = 0.0;
  tr.points.push_back({t, x, y, 0});
  while (t < t_end) {
    const Eigen::Vector2d v = velocity({x, y, t}, state);
    double step = std::min(dt, t_end - t);
    bool advanced = false;
    for (int halve = 0; halve < 60; ++halve) {
      const double nx = x + v[0] * step, ny = y + v[1] * step;
      if (equilibrium_density({nx, ny, t + step}, state) > 0.0) {
        x = nx;
        y = ny;
        t += step;
        advanced = true;
        break;
      }
      step /= 2;  // landing in a zero-density gap: back off near the boundary
    }
    if (!advanced) throw std::domain_error("numeric integration stuck at a density boundary");
  }
  if (t > 0.0) tr.points.push_back({t, x, y, 0});
  tr.outcome = {x >= 0 ? +1 : -1, y >= 0 ? +1 : -1};
  return tr;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,r_A,r_B,region_id\n";
  char buf[128];
  for (const TrajectoryPoint& p : tr.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", p.t, p.r_a, p.r_b, p.region);
    os << buf;
  }
}

// ---- single spin ----

double SingleSpinTrajectory::at(double t) const {
  if (points.empty()) throw std::logic_error("empty trajectory");
  if (t <= points.front().first) return points.front().second;
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (t <= points[k].first) {
      const auto& [t0, r0] = points[k - 1];
      const auto& [t1, r1] = points[k];
      return r0 + (r1 - r0) * (t - t0) / (t1 - t0);
    }
  }
  const auto& [t0, r0] = points[points.size() - 2];
  const auto& [t1, r1] = points.back();
  return r1 + (r1 - r0) / (t1 - t0) * (t - t1);
}

SingleSpinTrajectory evolve_single_spin(double r0, SingleSpinState state, double theta,
                                        double coupling, const PacketSpec& packet) {
  const double hw = packet.width / 2;
  if (!(r0 >= -hw && r0 < hw)) throw std::invalid_argument("r0 outside the initial packet");
  if (!(coupling > 0.0)) throw std::invalid_argument("coupling must be positive");

  const Eigen::Vector2d b = single_spin_amplitudes(state, theta);
  const double w[2] = {b[0] * b[0], b[1] * b[1]};
  const double tol = 1e-12 * packet.width / coupling;

  for (int attempt = 0; attempt < 5; ++attempt) {
    double r = r0 + (attempt == 0 ? 0.0 : kNudge * packet.width * std::pow(16.0, attempt - 1));
    double t = 0.0;
    bool pos = true, neg = true;
    SingleSpinTrajectory tr;
    bool stranded = false;
    for (int iter = 0; iter < 8 && !stranded; ++iter) {
      const double den = (pos ? w[0] : 0.0) + (neg ? w[1] : 0.0);
      if (den <= 0.0) {
        stranded = true;
        break;
      }
      const double v = coupling * ((pos ? w[0] : 0.0) - (neg ? w[1] : 0.0)) / den;
      if (tr.points.empty()) tr.points.emplace_back(t, r);
      const bool up_only = !neg || w[1] <= 0.0;
      const bool dn_only = !pos || w[0] <= 0.0;
      if (up_only || dn_only) {
        tr.sigma = up_only ? +1 : -1;
        const double t_sep = packet.width / coupling;
        if (t < t_sep) tr.points.emplace_back(t_sep, r + tr.sigma * coupling * (t_sep - t));
        return tr;
      }
      double dt_pos = std::numeric_limits<double>::infinity();
      double dt_neg = std::numeric_limits<double>::infinity();
      if (coupling - v > 0) dt_pos = std::max(0.0, (r - (-hw + coupling * t)) / (coupling - v));
      if (coupling + v > 0) dt_neg = std::max(0.0, ((hw - coupling * t) - r) / (coupling + v));
      const double dt = std::min(dt_pos, dt_neg);
      if (dt_pos <= dt + tol) pos = false;
      if (dt_neg <= dt + tol) neg = false;
      if (!pos && !neg) {
        stranded = true;
        break;
      }
      r += v * dt;
      t += dt;
      tr.points.emplace_back(t, r);
    }
    if (!stranded) throw std::logic_error("single-spin stepping did not terminate");
  }
  throw std::runtime_error("single-spin evolution stranded on a boundary");
}

int single_spin_outcome(double r0, SingleSpinState state, double theta, double coupling,
                        const PacketSpec& packet) {
  return evolve_single_spin(r0, state, theta, coupling, packet).sigma;
}

}  // namespace eprsim
