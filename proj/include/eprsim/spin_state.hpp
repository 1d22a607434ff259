#pragma once

#include <Eigen/Dense>
#include <complex>

#include "eprsim/angles.hpp"

namespace eprsim {

struct MeasurementSettings {
  double theta_a = 0.0;  // radians, x-z plane, measured from the z axis
  double theta_b = 0.0;
  InteractionMode mode = InteractionMode::VonNeumann;

  MeasurementSettings() = default;
  MeasurementSettings(double ta, double tb, InteractionMode m = InteractionMode::VonNeumann)
      : theta_a(ta), theta_b(tb), mode(m) {
    if (!std::isfinite(ta) || !std::isfinite(tb))
      throw std::invalid_argument("measurement angles must be finite");
  }

  MeasurementSettings canonical() const {
    return {canonicalize_angle(theta_a, mode), canonicalize_angle(theta_b, mode), mode};
  }
};

// The four complex branch amplitudes a_ij of a two-qubit state expressed in
// the (theta_a, theta_b) measurement basis. Index 0 = spin up along the local
// axis, 1 = spin down. Row: wing A, column: wing B.
class SpinAmplitudes {
 public:
  SpinAmplitudes() : m_(Eigen::Matrix2cd::Zero()) {}
  explicit SpinAmplitudes(const Eigen::Matrix2cd& m) : m_(m) { check_norm(); }

  std::complex<double> a_pp() const { return m_(0, 0); }
  std::complex<double> a_pm() const { return m_(0, 1); }
  std::complex<double> a_mp() const { return m_(1, 0); }
  std::complex<double> a_mm() const { return m_(1, 1); }

  const Eigen::Matrix2cd& matrix() const { return m_; }

  /// |a_ij|^2 as a real 2x2 array (the branch weights).
  Eigen::Matrix2d weights() const { return m_.cwiseAbs2(); }

  /// sum_ij sigma_i sigma_j |a_ij|^2 with sigma = +/-1.
  double correlation() const {
    Eigen::Matrix2d w = weights();
    return w(0, 0) - w(0, 1) - w(1, 0) + w(1, 1);
  }

  double norm() const { return m_.norm(); }

 private:
  void check_norm() const {
    if (std::abs(m_.squaredNorm() - 1.0) > 1e-12)
      throw std::invalid_argument("spin amplitudes must be normalized");
  }
  Eigen::Matrix2cd m_;
};

// Real perturbation of the singlet amplitudes at settings (0, 0). The
// normalization constraint forces eps_pm == eps_mp for real components; the
// derived scalar eps = 2*sqrt(2)*eps_pm.
struct PerturbationParams {
  double eps_pp = 0.0;
  double eps_pm = 0.0;
  double eps_mp = 0.0;
  double eps_mm = 0.0;

  PerturbationParams() = default;
  PerturbationParams(double pp, double pm, double mp, double mm)
      : eps_pp(pp), eps_pm(pm), eps_mp(mp), eps_mm(mm) {
    constexpr double lim = 0.2;  // perturbative regime
    if (std::abs(pp) > lim || std::abs(pm) > lim || std::abs(mp) > lim || std::abs(mm) > lim)
      throw std::invalid_argument("perturbation amplitudes outside perturbative bound 0.2");
    if (std::abs(pm - mp) > 1e-15)
      throw std::invalid_argument("eps_pm and eps_mp must be equal");
  }

  /// Perturbation with all four components equal, parametrized by the scalar
  /// eps: eps_ij = eps / (2*sqrt(2)). This is the family whose leading-order
  /// effect on alpha(0,0,pi) carries the -5/4 coefficient; the two-component
  /// family (eps_pp = eps_mm = 0) has coefficient -1 instead.
  static PerturbationParams symmetric(double eps);

  double scalar_eps() const { return 2.0 * std::sqrt(2.0) * eps_pm; }
};

/// Singlet amplitudes in the (theta_a, theta_b) measurement basis. Depends
/// only on delta = theta_b - theta_a after canonicalization:
///   a_pp = a_mm = sin(delta/2)/sqrt(2),  a_pm = -a_mp = cos(delta/2)/sqrt(2).
SpinAmplitudes singlet_amplitudes(const MeasurementSettings& settings);

/// Perturbed singlet amplitudes: the state (eps_pp, 1/sqrt2 + eps_pm,
/// -1/sqrt2 + eps_mp, eps_mm) at settings (0,0), renormalized, then
/// re-expressed in the requested measurement basis.
SpinAmplitudes perturbed_singlet(const PerturbationParams& params,
                                 const MeasurementSettings& settings);

/// Re-express a state given in the (0, 0) basis in the (theta_a, theta_b)
/// basis (one half-angle rotation per wing). `state00` need not be normalized;
/// the result is renormalized.
SpinAmplitudes amplitudes_in_basis(const Eigen::Matrix2cd& state00, double theta_a,
                                   double theta_b);

// A state preparation: either the exact singlet or a perturbed one. Produces
// amplitudes in any measurement basis, which is what the outcome analysis
// varies when a setting is shifted.
class StatePrep {
 public:
  StatePrep() = default;  // singlet
  explicit StatePrep(const PerturbationParams& p) : perturbation_(p), perturbed_(true) {}

  SpinAmplitudes at(const MeasurementSettings& settings) const {
    return perturbed_ ? perturbed_singlet(perturbation_, settings)
                      : singlet_amplitudes(settings);
  }

  bool is_perturbed() const { return perturbed_; }

 private:
  PerturbationParams perturbation_{};
  bool perturbed_ = false;
};

}  // namespace eprsim
