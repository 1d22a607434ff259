#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eprsim/ensemble.hpp"
#include "eprsim/spin_state.hpp"

namespace eprsim {

// Which fraction is being measured. All three are the same machinery, they
// differ only in which wing's outcome is compared and which wing's setting is
// shifted:
//   Alpha     : outcomes at A, distant shift theta_b -> theta_shifted
//   Beta      : outcomes at B, distant shift theta_a -> theta_shifted
//   BetaTilde : outcomes at B, local   shift theta_b -> theta_shifted
enum class TransitionKind { Alpha, Beta, BetaTilde };

struct TransitionReport {
  TransitionKind kind = TransitionKind::Alpha;
  char wing = 'A';  // whose outcomes are compared
  MeasurementSettings before, after;
  double nu_plus_minus = 0, nu_minus_plus = 0;  // transition-set masses
  double nu_pm_err = 0, nu_mp_err = 0;
  double degree = 0;  // alpha / beta / beta~ = nu(+,-) + nu(-,+)
  double degree_err = 0;
};

struct SignalReport {
  double p_plus_before = 0;  // P(sigma = +1) at the compared wing
  double p_plus_after = 0;
  double signal = 0;  // = p_after - p_before = nu(-,+) - nu(+,-)
  double std_error = 0;
  TransitionReport transitions;
};

struct OutcomeStatistics {
  double p_a_plus = 0, p_b_plus = 0;
  double correlation = 0;  // E[sigma_A sigma_B]
  double p_a_err = 0, p_b_err = 0, corr_err = 0;
};

struct BoundCheck {
  int id = 0;  // 1..5
  double lhs = 0, rhs = 0;
  bool satisfied = false;
  double gap = 0;  // lhs - rhs
  std::string warning;
};

struct DetailedBalanceReport {
  double nu_plus_minus = 0, nu_minus_plus = 0;
  double difference = 0;  // |nu(+,-) - nu(-,+)|
  double std_error = 0;
};

OutcomeStatistics outcome_statistics(const MeasurementSettings& settings, const StatePrep& state,
                                     const CouplingProfile& couplings, const PacketSpec& packet,
                                     const EnsembleDistribution& dist, const Method& method);

/// Transition fractions nu(+,-), nu(-,+) and their sum under `dist`. The
/// shifted angle replaces theta_b (Alpha, BetaTilde) or theta_a (Beta).
TransitionReport transition_fractions(TransitionKind kind, double theta_a, double theta_b,
                                      double theta_shifted, const StatePrep& state,
                                      const CouplingProfile& couplings, const PacketSpec& packet,
                                      const EnsembleDistribution& dist, const Method& method,
                                      InteractionMode mode = InteractionMode::VonNeumann);

/// Equilibrium transition fractions and their difference (zero in theory).
DetailedBalanceReport detailed_balance_check(TransitionKind kind, double theta_a, double theta_b,
                                             double theta_shifted,
                                             const CouplingProfile& couplings,
                                             const PacketSpec& packet, const Method& method,
                                             InteractionMode mode = InteractionMode::VonNeumann);

/// Statistical signal at the compared wing induced by the shift, under an
/// arbitrary (generally nonequilibrium) distribution.
SignalReport signal(TransitionKind kind, double theta_a, double theta_b, double theta_shifted,
                    const CouplingProfile& couplings, const PacketSpec& packet,
                    const EnsembleDistribution& dist, const Method& method,
                    InteractionMode mode = InteractionMode::VonNeumann);

// Measured degrees of nonlocality entering a bound check; only the fields a
// given bound uses are read.
struct BoundInputs {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> beta_tilde;
};

/// Lower bounds on degrees of nonlocality.
///   1: alpha + beta~              >= |cos(tA - tB') - cos(tA - tB)| / 2
///   2: alpha(tA,tB,tB+d) + beta(tA,tB,tA-d) >= |cos(tA-tB-d) - cos(tA-tB)| / 2
///   3: bound 2 at tA = tB = 0     >= (1 - cos d) / 2
///   4: alpha(tA,tB,tB+d)          >= |cos(tA-tB-d) - cos(tA-tB)| / 4
///   5: bound 4 at tA = tB = 0     >= (1 - cos d) / 4
/// `shift` is theta_b' for bound 1 and the rotation delta for bounds 2-5.
/// Bounds 2-5 presume exchange symmetry; a warning is set when a_a != a_b.
BoundCheck bound_check(int id, double theta_a, double theta_b, double shift,
                       const BoundInputs& measured, const CouplingProfile& couplings,
                       double tolerance = 0.0);

/// Mean of the bound-5 right-hand side (1 - cos delta)/4 over a setting-shift
/// range, in bits per pair; analytic quadrature.
double nonlocal_bits(double delta_lo, double delta_hi);

// ---- perturbed-singlet sweep ----

struct SweepEntry {
  double eps = 0, delta = 0;
  double alpha = 0, alpha_err = 0;
};

struct QuadraticFit {
  double intercept = 0;  // alpha(eps -> 0)
  double coeff = 0;      // d^2 alpha / d eps^2 / 2, i.e. alpha ~ intercept + coeff..eps^2
};

struct EntanglementSweepResult {
  std::vector<SweepEntry> entries;
  std::optional<QuadraticFit> fit_at_pi;
};

/// alpha(0,0,delta) for perturbed singlet states over an eps x delta grid,
/// equal couplings. Uses the symmetric four-component perturbation family
/// (PerturbationParams::symmetric). When the delta grid contains pi, the
/// eps-dependence at pi is summarized by a least-squares fit of
/// alpha = intercept + coeff * eps^2 (the expansion has no linear term).
EntanglementSweepResult entanglement_sweep(const std::vector<double>& eps_grid,
                                           const std::vector<double>& delta_grid,
                                           const CouplingProfile& couplings,
                                           const PacketSpec& packet, const Method& method);

// ---- illustrative unit-circle model ----

// Hidden variables (p, q) uniform (or otherwise distributed) on the unit
// disc; sigma_A = +1 right of a diameter, and a setting shift rotates that
// diameter by the chord angle gamma.
enum class DiscDistribution { Uniform, UpperHalfUniform };

struct CircleRunReport {
  double gamma = 0;
  double p_plus_before = 0, p_plus_after = 0;
  double nu_plus_minus = 0, nu_minus_plus = 0;
  double std_error = 0;
};

CircleRunReport circle_model_run(double gamma, DiscDistribution dist, const Method& method);

// ---- exploratory search for a balanced nonequilibrium distribution ----

struct ThetaTriple {
  double theta_a = 0, theta_b = 0, theta_b_prime = 0;
};

struct BalancedSearchResult {
  std::string family;
  std::string candidate;               // description of the best distribution found
  std::vector<double> residuals;       // per-triple |nu(+,-) - nu(-,+)| under it
  double max_residual = 0;
  bool is_equilibrium = false;
};

/// Search a nonequilibrium family for a distribution whose transition sets
/// are balanced across all supplied triples. family: "linear-tilt" or
/// "grid-weights". Exploratory; reports residuals, proves nothing.
BalancedSearchResult balanced_distribution_search(const std::vector<ThetaTriple>& triples,
                                                  const std::string& family, int budget,
                                                  const CouplingProfile& couplings,
                                                  const PacketSpec& packet, const Method& method);

}  // namespace eprsim
