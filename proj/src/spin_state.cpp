#include "eprsim/spin_state.hpp"

namespace eprsim {

PerturbationParams PerturbationParams::symmetric(double eps) {
  double e = eps / (2.0 * std::sqrt(2.0));
  return {e, e, e, e};
}

SpinAmplitudes singlet_amplitudes(const MeasurementSettings& settings) {
  MeasurementSettings s = settings.canonical();
  const double delta = s.theta_b - s.theta_a;
  const double sn = std::sin(delta / 2) / std::sqrt(2.0);
  const double cs = std::cos(delta / 2) / std::sqrt(2.0);
  Eigen::Matrix2cd m;
  m << sn, cs, -cs, sn;
  return SpinAmplitudes(m);
}

SpinAmplitudes amplitudes_in_basis(const Eigen::Matrix2cd& state00, double theta_a,
                                   double theta_b) {
  auto half_rot = [](double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    Eigen::Matrix2d r;
    // <theta j | z k>: rows j in the rotated basis, columns k in the old one
    r << c, s, -s, c;
    return r;
  };
  Eigen::Matrix2cd m = half_rot(theta_a) * state00 * half_rot(theta_b).transpose();
  m /= m.norm();
  return SpinAmplitudes(m);
}

SpinAmplitudes perturbed_singlet(const PerturbationParams& params,
                                 const MeasurementSettings& settings) {
  MeasurementSettings s = settings.canonical();
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd state00;
  state00 << params.eps_pp, r + params.eps_pm, -r + params.eps_mp, params.eps_mm;
  return amplitudes_in_basis(state00, s.theta_a, s.theta_b);
}

}  // namespace eprsim
