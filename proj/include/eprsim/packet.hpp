#pragma once

#include <Eigen/Dense>

#include "eprsim/spin_state.hpp"

namespace eprsim {

// Step-function couplings g_X(t) = a_X for t >= 0, so the branch
// displacements are h_X(t) = a_X * t.
struct CouplingProfile {
  double a_a = 1.0;
  double a_b = 1.0;

  CouplingProfile() = default;
  CouplingProfile(double aa, double ab) : a_a(aa), a_b(ab) {
    if (!(aa > 0.0) || !(ab > 0.0))
      throw std::invalid_argument("coupling amplitudes must be positive");
  }
};

// Square pointer packet of width delta: |phi(r)|^2 = 1/delta on
// [-delta/2, +delta/2), 0 elsewhere. Half-open support so that region
// membership at packet edges is unambiguous.
struct PacketSpec {
  double width = 1.0;

  PacketSpec() = default;
  explicit PacketSpec(double w) : width(w) {
    if (!(w > 0.0)) throw std::invalid_argument("packet width must be positive");
  }

  double density(double r) const {
    return (r >= -width / 2 && r < width / 2) ? 1.0 / width : 0.0;
  }
};

struct PhasePoint {
  double r_a = 0.0;
  double r_b = 0.0;
  double t = 0.0;
};

// Everything that fixes the wavefunction at time t: the four branch
// amplitudes and the packet centers s_i h_a(t), s_j h_b(t).
struct BranchState {
  SpinAmplitudes amplitudes;
  CouplingProfile couplings;
  PacketSpec packet;

  double h_a(double t) const { return couplings.a_a * t; }
  double h_b(double t) const { return couplings.a_b * t; }
};

/// |psi_ij|^2 at a phase point; i, j in {0 (up), 1 (down)}.
double branch_density(const PhasePoint& p, int i, int j, const BranchState& s);

/// rho_eq = sum of the four branch densities. Integrates to 1 at every t.
double equilibrium_density(const PhasePoint& p, const BranchState& s);

/// De Broglie guidance velocity (v_a, v_b) = (j_a, j_b)/rho_eq.
/// Throws std::domain_error where rho_eq = 0.
Eigen::Vector2d velocity(const PhasePoint& p, const BranchState& s);

// ---- single-spin model ----

enum class SingleSpinState { ZPlus, XPlus };

/// Two-branch amplitudes (b_up, b_dn) of the given state in the theta basis.
Eigen::Vector2d single_spin_amplitudes(SingleSpinState state, double theta);

/// One-dimensional guidance velocity for the single-spin pointer model.
/// Throws std::domain_error where the density vanishes.
double single_spin_velocity(double r, double t, SingleSpinState state, double theta,
                            double coupling, const PacketSpec& packet = PacketSpec{});

}  // namespace eprsim
