#pragma once

#include <iosfwd>
#include <vector>

#include "eprsim/packet.hpp"

namespace eprsim {

// The hidden variable of a run: the initial pointer positions, a point of the
// initial square [-delta/2, delta/2)^2.
struct HiddenVariable {
  double r_a0 = 0.0;
  double r_b0 = 0.0;
};

struct OutcomePair {
  int sigma_a = 0;  // exactly +1 or -1
  int sigma_b = 0;

  bool operator==(const OutcomePair&) const = default;
};

// Velocity-region id: 3*code(bx) + code(by) where code(both)=0, code(+)=1,
// code(-)=2 and bx/by are the moving-band memberships of the point.
struct TrajectoryPoint {
  double t = 0.0;
  double r_a = 0.0;
  double r_b = 0.0;
  int region = 0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;  // piecewise-linear breakpoints, t strictly increasing
  OutcomePair outcome;
};

/// Exact evolution of a hidden variable to its outcome by event stepping:
/// inside each overlap region the velocity is constant, and the next event is
/// a moving packet edge meeting the point (closed-form crossing times).
/// Breakpoints are recorded through full branch separation
/// (min(h_a, h_b) >= delta).
Trajectory evolve_exact(const HiddenVariable& lambda, const SpinAmplitudes& amplitudes,
                        const CouplingProfile& couplings, const PacketSpec& packet);

/// Outcome only; same dynamics as evolve_exact without recording.
OutcomePair classify_outcome(const HiddenVariable& lambda, const SpinAmplitudes& amplitudes,
                             const CouplingProfile& couplings, const PacketSpec& packet);

/// Fixed-step explicit integration of the velocity field, sampled pointwise.
/// Independent cross-check for evolve_exact. Steps that would land on zero
/// density are halved. `t_end` < 0 means the default separation time
/// delta/min(a_a, a_b).
Trajectory evolve_numeric(const HiddenVariable& lambda, const SpinAmplitudes& amplitudes,
                          const CouplingProfile& couplings, const PacketSpec& packet,
                          double dt, double t_end = -1.0);

/// CSV dump, columns: t,r_A,r_B,region_id.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

// ---- single-spin model (one pointer) ----

struct SingleSpinTrajectory {
  std::vector<std::pair<double, double>> points;  // (t, r)
  int sigma = 0;

  /// Piecewise-linear position at time t (constant extrapolation of the last
  /// segment's velocity beyond the recorded range).
  double at(double t) const;
};

SingleSpinTrajectory evolve_single_spin(double r0, SingleSpinState state, double theta,
                                        double coupling, const PacketSpec& packet = PacketSpec{});

/// Sign of the pointer position at large times.
int single_spin_outcome(double r0, SingleSpinState state, double theta, double coupling,
                        const PacketSpec& packet = PacketSpec{});

}  // namespace eprsim
