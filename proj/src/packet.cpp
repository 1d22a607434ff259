#include "eprsim/packet.hpp"

#include <stdexcept>

namespace eprsim {

namespace {
constexpr double kSign[2] = {+1.0, -1.0};
}

double branch_density(const PhasePoint& p, int i, int j, const BranchState& s) {
  if (p.t < 0) throw std::invalid_argument("time must be nonnegative");
  const Eigen::Matrix2d w = s.amplitudes.weights();
  return w(i, j) * s.packet.density(p.r_a - kSign[i] * s.h_a(p.t)) *
         s.packet.density(p.r_b - kSign[j] * s.h_b(p.t));
}

double equilibrium_density(const PhasePoint& p, const BranchState& s) {
  double rho = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) rho += branch_density(p, i, j, s);
  return rho;
}

Eigen::Vector2d velocity(const PhasePoint& p, const BranchState& s) {
  double rho = 0.0, ja = 0.0, jb = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double d = branch_density(p, i, j, s);
      rho += d;
      ja += kSign[i] * d;
      jb += kSign[j] * d;
    }
  if (rho <= 0.0) throw std::domain_error("velocity undefined: zero density");
  return {s.couplings.a_a * ja / rho, s.couplings.a_b * jb / rho};
}

Eigen::Vector2d single_spin_amplitudes(SingleSpinState state, double theta) {
  const double c = std::cos(theta / 2), sn = std::sin(theta / 2);
  switch (state) {
    case SingleSpinState::ZPlus:
      return {c, -sn};
    case SingleSpinState::XPlus:
      return {(c + sn) / std::sqrt(2.0), (c - sn) / std::sqrt(2.0)};
  }
  throw std::logic_error("unreachable");
}

double single_spin_velocity(double r, double t, SingleSpinState state, double theta,
                            double coupling, const PacketSpec& packet) {
  if (t < 0) throw std::invalid_argument("time must be nonnegative");
  const Eigen::Vector2d b = single_spin_amplitudes(state, theta);
  const double h = coupling * t;
  const double up = b[0] * b[0] * packet.density(r - h);
  const double dn = b[1] * b[1] * packet.density(r + h);
  if (up + dn <= 0.0) throw std::domain_error("velocity undefined: zero density");
  return coupling * (up - dn) / (up + dn);
}

}  // namespace eprsim
