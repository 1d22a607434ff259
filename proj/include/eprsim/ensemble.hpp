#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "eprsim/packet.hpp"
#include "eprsim/rng.hpp"
#include "eprsim/trajectory.hpp"

namespace eprsim {

enum class HalfSquareSide { Left, Right, Top, Bottom };
enum class QuadrantId { TopRight, TopLeft, BottomLeft, BottomRight };

// A probability density over the initial square [-delta/2, delta/2)^2.
// Equilibrium is the uniform density; the other kinds are parametrized
// nonequilibrium families for signal studies.
class EnsembleDistribution {
 public:
  enum class Kind {
    EquilibriumUniform,
    SubRectangleUniform,
    HalfSquare,
    Quadrant,
    LinearTilt,
    GridWeights,
    PointMass,
  };

  static EnsembleDistribution equilibrium(const PacketSpec& packet = PacketSpec{});
  /// Uniform on [x0,x1) x [y0,y1), which must lie inside the initial square.
  static EnsembleDistribution sub_rectangle(const PacketSpec& packet, double x0, double x1,
                                            double y0, double y1);
  static EnsembleDistribution half_square(const PacketSpec& packet, HalfSquareSide side);
  static EnsembleDistribution quadrant(const PacketSpec& packet, QuadrantId q);
  /// Density proportional to 1 + c * r_a; requires |c| <= 2/delta.
  static EnsembleDistribution linear_tilt(const PacketSpec& packet, double c);
  static EnsembleDistribution point_mass(const PacketSpec& packet, HiddenVariable at);
  /// m x m nonnegative cell weights, row-major, row 0 at the bottom
  /// (r_b = -delta/2). Normalized on construction.
  static EnsembleDistribution grid_weights(const PacketSpec& packet, int m,
                                           std::vector<double> weights);
  /// Plain-text format: header "<rows> <cols> <delta>" with rows == cols,
  /// then rows*cols nonnegative weights.
  static EnsembleDistribution load_grid_weights(std::istream& is);

  Kind kind() const { return kind_; }
  const PacketSpec& packet() const { return packet_; }
  double delta() const { return packet_.width; }

  /// Normalized density at a point of the initial square.
  double density(double r_a, double r_b) const;

  /// Reproducible sample number `index` of the stream `seed`.
  HiddenVariable sample_at(std::uint64_t seed, std::uint64_t index) const;

  /// Mass of the vertical segment {r_a} x [y0, y1) (per unit r_a; the
  /// integrand of the column quadrature). Unsupported for point masses.
  double column_mass(double r_a, double y0, double y1) const;

  std::string describe() const;

 private:
  EnsembleDistribution() = default;

  Kind kind_ = Kind::EquilibriumUniform;
  PacketSpec packet_{};
  // sub-rectangle / half-square / quadrant bounds
  double x0_ = 0, x1_ = 0, y0_ = 0, y1_ = 0;
  double tilt_ = 0;
  HiddenVariable point_{};
  int m_ = 0;
  std::vector<double> w_;        // normalized cell masses
  std::vector<double> cdf_;      // cumulative cell masses for sampling
};

struct SampleStream {
  std::uint64_t seed = 0;
  std::vector<HiddenVariable> samples;
};

/// n reproducible i.i.d. samples; sample() called twice with the same
/// (dist, seed, n) yields identical streams.
SampleStream sample(const EnsembleDistribution& dist, std::uint64_t seed, std::uint64_t n);

// Quadrature / Monte Carlo method selector for region fractions.
struct Method {
  enum class Kind { Mc, Grid, Columns } kind = Kind::Mc;
  std::uint64_t n = 1'000'000;  // mc sample count
  std::uint64_t seed = 42;
  int m = 1000;                 // grid resolution (m x m, midpoint rule)
  int ncol = 2000;              // columns method: column count and scan depth
  int scan = 257;

  static Method mc(std::uint64_t n, std::uint64_t seed) { return {Kind::Mc, n, seed}; }
  static Method grid(int m) {
    Method me;
    me.kind = Kind::Grid;
    me.m = m;
    return me;
  }
  /// High-accuracy column quadrature: per column, boundary location by
  /// bisection. Assumes the indicator has O(1) boundary crossings per column
  /// at the scan resolution.
  static Method columns(int ncol, int scan = 257) {
    Method me;
    me.kind = Kind::Columns;
    me.ncol = ncol;
    me.scan = scan;
    return me;
  }

  std::string describe() const;
};

struct FractionEstimate {
  double value = 0.0;
  double error = 0.0;  // 1-sigma standard error (mc) or resolution bound (grid)
};

/// Mass of {lambda : indicator(lambda)} under the distribution.
FractionEstimate region_fraction(const EnsembleDistribution& dist,
                                 const std::function<bool(const HiddenVariable&)>& indicator,
                                 const Method& method);

}  // namespace eprsim
