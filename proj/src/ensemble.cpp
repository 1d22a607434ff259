#include "eprsim/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "eprsim/parallel.hpp"

namespace eprsim {

namespace {

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

EnsembleDistribution EnsembleDistribution::equilibrium(const PacketSpec& packet) {
  EnsembleDistribution d;
  d.kind_ = Kind::EquilibriumUniform;
  d.packet_ = packet;
  const double hw = packet.width / 2;
  d.x0_ = -hw, d.x1_ = hw, d.y0_ = -hw, d.y1_ = hw;
  return d;
}

EnsembleDistribution EnsembleDistribution::sub_rectangle(const PacketSpec& packet, double x0,
                                                         double x1, double y0, double y1) {
  const double hw = packet.width / 2;
  if (!(x0 < x1 && y0 < y1) || x0 < -hw || x1 > hw || y0 < -hw || y1 > hw)
    throw std::invalid_argument("sub-rectangle must be nonempty and inside the initial square");
  EnsembleDistribution d;
  d.kind_ = Kind::SubRectangleUniform;
  d.packet_ = packet;
  d.x0_ = x0, d.x1_ = x1, d.y0_ = y0, d.y1_ = y1;
  return d;
}

EnsembleDistribution EnsembleDistribution::half_square(const PacketSpec& packet,
                                                       HalfSquareSide side) {
  const double hw = packet.width / 2;
  EnsembleDistribution d = equilibrium(packet);
  d.kind_ = Kind::HalfSquare;
  switch (side) {
    case HalfSquareSide::Left: d.x1_ = 0; break;
    case HalfSquareSide::Right: d.x0_ = 0; break;
    case HalfSquareSide::Top: d.y0_ = 0; break;
    case HalfSquareSide::Bottom: d.y1_ = 0; break;
  }
  return d;
}

EnsembleDistribution EnsembleDistribution::quadrant(const PacketSpec& packet, QuadrantId q) {
  EnsembleDistribution d = equilibrium(packet);
  d.kind_ = Kind::Quadrant;
  const bool right = q == QuadrantId::TopRight || q == QuadrantId::BottomRight;
  const bool top = q == QuadrantId::TopRight || q == QuadrantId::TopLeft;
  (right ? d.x0_ : d.x1_) = 0;
  (top ? d.y0_ : d.y1_) = 0;
  return d;
}

EnsembleDistribution EnsembleDistribution::linear_tilt(const PacketSpec& packet, double c) {
  if (std::abs(c) > 2.0 / packet.width + 1e-15)
    throw std::invalid_argument("linear tilt must satisfy |c| <= 2/delta");
  EnsembleDistribution d = equilibrium(packet);
  d.kind_ = Kind::LinearTilt;
  d.tilt_ = c;
  return d;
}

EnsembleDistribution EnsembleDistribution::point_mass(const PacketSpec& packet,
                                                      HiddenVariable at) {
  const double hw = packet.width / 2;
  if (!(at.r_a0 >= -hw && at.r_a0 < hw && at.r_b0 >= -hw && at.r_b0 < hw))
    throw std::invalid_argument("point mass must lie inside the initial square");
  EnsembleDistribution d;
  d.kind_ = Kind::PointMass;
  d.packet_ = packet;
  d.point_ = at;
  return d;
}

EnsembleDistribution EnsembleDistribution::grid_weights(const PacketSpec& packet, int m,
                                                        std::vector<double> weights) {
  if (m < 1 || weights.size() != static_cast<std::size_t>(m) * m)
    throw std::invalid_argument("grid weights must be an m x m array");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("grid weights must be nonnegative and finite");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("grid weights must not all vanish");
  EnsembleDistribution d = equilibrium(packet);
  d.kind_ = Kind::GridWeights;
  d.m_ = m;
  d.w_ = std::move(weights);
  for (double& w : d.w_) w /= total;
  d.cdf_.resize(d.w_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < d.w_.size(); ++k) {
    acc += d.w_[k];
    d.cdf_[k] = acc;
  }
  d.cdf_.back() = 1.0;
  return d;
}

EnsembleDistribution EnsembleDistribution::load_grid_weights(std::istream& is) {
  int rows = 0, cols = 0;
  double delta = 0.0;
  if (!(is >> rows >> cols >> delta))
    throw std::invalid_argument("grid-weights file: bad header, expected '<rows> <cols> <delta>'");
  if (rows != cols) throw std::invalid_argument("grid-weights file: rows != cols");
  if (!(delta > 0.0)) throw std::invalid_argument("grid-weights file: delta must be positive");
  std::vector<double> w(static_cast<std::size_t>(rows) * cols);
  for (double& v : w)
    if (!(is >> v)) throw std::invalid_argument("grid-weights file: truncated weight table");
  return grid_weights(PacketSpec{delta}, rows, std::move(w));
}

double EnsembleDistribution::density(double r_a, double r_b) const {
  const double hw = packet_.width / 2;
  if (r_a < -hw || r_a >= hw || r_b < -hw || r_b >= hw) return 0.0;
  switch (kind_) {
    case Kind::EquilibriumUniform:
    case Kind::SubRectangleUniform:
    case Kind::HalfSquare:
    case Kind::Quadrant: {
      const bool in = r_a >= x0_ && r_a < x1_ && r_b >= y0_ && r_b < y1_;
      return in ? 1.0 / ((x1_ - x0_) * (y1_ - y0_)) : 0.0;
    }
    case Kind::LinearTilt:
      return (1.0 + tilt_ * r_a) / (packet_.width * packet_.width);
    case Kind::GridWeights: {
      const double cell = packet_.width / m_;
      int col = static_cast<int>((r_a + hw) / cell);
      int row = static_cast<int>((r_b + hw) / cell);
      col = std::clamp(col, 0, m_ - 1);
      row = std::clamp(row, 0, m_ - 1);
      return w_[static_cast<std::size_t>(row) * m_ + col] / (cell * cell);
    }
    case Kind::PointMass:
      throw std::invalid_argument("point mass has no density function");
  }
  throw std::logic_error("unreachable");
}

HiddenVariable EnsembleDistribution::sample_at(std::uint64_t seed, std::uint64_t index) const {
  CounterRng rng = CounterRng::at(seed, index);
  switch (kind_) {
    case Kind::EquilibriumUniform:
    case Kind::SubRectangleUniform:
    case Kind::HalfSquare:
    case Kind::Quadrant:
      return {rng.next_in(x0_, x1_), rng.next_in(y0_, y1_)};
    case Kind::LinearTilt: {
      const double d = packet_.width;
      const double u = rng.next_unit();
      double x;
      if (std::abs(tilt_) < 1e-14) {
        x = -d / 2 + u * d;
      } else {
        const double b = 1.0 - tilt_ * d / 2;
        x = (-1.0 + std::sqrt(b * b + 2.0 * tilt_ * d * u)) / tilt_;
      }
      return {x, rng.next_in(-d / 2, d / 2)};
    }
    case Kind::GridWeights: {
      const double u = rng.next_unit();
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      const std::size_t k = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
      const double cell = packet_.width / m_;
      const double x0 = -packet_.width / 2 + (k % m_) * cell;
      const double y0 = -packet_.width / 2 + (k / m_) * cell;
      return {x0 + cell * rng.next_unit(), y0 + cell * rng.next_unit()};
    }
    case Kind::PointMass:
      return point_;
  }
  throw std::logic_error("unreachable");
}

double EnsembleDistribution::column_mass(double r_a, double y0, double y1) const {
  if (y1 <= y0) return 0.0;
  const double hw = packet_.width / 2;
  switch (kind_) {
    case Kind::EquilibriumUniform:
    case Kind::SubRectangleUniform:
    case Kind::HalfSquare:
    case Kind::Quadrant: {
      if (r_a < x0_ || r_a >= x1_) return 0.0;
      return overlap(y0, y1, y0_, y1_) / ((x1_ - x0_) * (y1_ - y0_));
    }
    case Kind::LinearTilt:
      if (r_a < -hw || r_a >= hw) return 0.0;
      return (1.0 + tilt_ * r_a) / (packet_.width * packet_.width) * overlap(y0, y1, -hw, hw);
    case Kind::GridWeights: {
      if (r_a < -hw || r_a >= hw) return 0.0;
      const double cell = packet_.width / m_;
      const int col = std::clamp(static_cast<int>((r_a + hw) / cell), 0, m_ - 1);
      double mass = 0.0;
      for (int row = 0; row < m_; ++row) {
        const double ry0 = -hw + row * cell;
        const double ov = overlap(y0, y1, ry0, ry0 + cell);
        if (ov > 0) mass += w_[static_cast<std::size_t>(row) * m_ + col] / (cell * cell) * ov;
      }
      return mass;
    }
    case Kind::PointMass:
      throw std::invalid_argument("column quadrature is undefined for a point mass");
  }
  throw std::logic_error("unreachable");
}

std::string EnsembleDistribution::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::EquilibriumUniform: return "equilibrium-uniform";
    case Kind::SubRectangleUniform:
      os << "sub-rectangle-uniform[" << x0_ << "," << x1_ << ")x[" << y0_ << "," << y1_ << ")";
      return os.str();
    case Kind::HalfSquare:
      os << "half-square[" << x0_ << "," << x1_ << ")x[" << y0_ << "," << y1_ << ")";
      return os.str();
    case Kind::Quadrant:
      os << "quadrant[" << x0_ << "," << x1_ << ")x[" << y0_ << "," << y1_ << ")";
      return os.str();
    case Kind::LinearTilt:
      os << "linear-tilt c=" << tilt_;
      return os.str();
    case Kind::GridWeights:
      os << "grid-weights m=" << m_;
      return os.str();
    case Kind::PointMass:
      os << "point-mass (" << point_.r_a0 << "," << point_.r_b0 << ")";
      return os.str();
  }
  return "?";
}

SampleStream sample(const EnsembleDistribution& dist, std::uint64_t seed, std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("sample count must be at least 1");
  SampleStream s;
  s.seed = seed;
  s.samples.resize(n);
  struct None {};
  parallel_chunked<None>(
      n, None{}, [&](std::uint64_t i, None&) { s.samples[i] = dist.sample_at(seed, i); },
      [](None&, const None&) {});
  return s;
}

std::string Method::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Mc: os << "mc(n=" << n << ",seed=" << seed << ")"; break;
    case Kind::Grid: os << "grid(m=" << m << ")"; break;
    case Kind::Columns: os << "columns(n=" << ncol << ",scan=" << scan << ")"; break;
  }
  return os.str();
}

namespace {

FractionEstimate fraction_mc(const EnsembleDistribution& dist,
                             const std::function<bool(const HiddenVariable&)>& ind,
                             std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("mc sample count must be at least 1");
  const std::uint64_t hits = parallel_chunked<std::uint64_t>(
      n, 0,
      [&](std::uint64_t i, std::uint64_t& acc) {
        if (ind(dist.sample_at(seed, i))) ++acc;
      },
      [](std::uint64_t& total, const std::uint64_t& p) { total += p; });
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(std::max(p * (1 - p), 1.0 / n) / static_cast<double>(n))};
}

FractionEstimate fraction_grid(const EnsembleDistribution& dist,
                               const std::function<bool(const HiddenVariable&)>& ind, int m) {
  if (m < 2) throw std::invalid_argument("grid resolution must be at least 2");
  const double hw = dist.delta() / 2;
  const double cell = dist.delta() / m;
  const std::uint64_t total_cells = static_cast<std::uint64_t>(m) * m;
  std::vector<std::uint8_t> flags(total_cells);
  std::vector<double> mass(total_cells);
  struct None {};
  parallel_chunked<None>(
      total_cells, None{},
      [&](std::uint64_t k, None&) {
        const double x = -hw + (static_cast<double>(k % m) + 0.5) * cell;
        const double y = -hw + (static_cast<double>(k / m) + 0.5) * cell;
        mass[k] = dist.density(x, y) * cell * cell;
        flags[k] = mass[k] > 0 && ind({x, y}) ? 1 : 0;
      },
      [](None&, const None&) {});
  double total = 0.0, inside = 0.0, boundary = 0.0;
  for (std::uint64_t k = 0; k < total_cells; ++k) {
    total += mass[k];
    if (flags[k]) inside += mass[k];
    const std::uint64_t col = k % m;
    if (col + 1 < static_cast<std::uint64_t>(m) && flags[k] != flags[k + 1])
      boundary += mass[k] + mass[k + 1];
    if (k + m < total_cells && flags[k] != flags[k + m]) boundary += mass[k] + mass[k + m];
  }
  if (total <= 0.0) throw std::invalid_argument("distribution has no mass on the grid");
  // midpoint rule: the value is exact except in cells straddling the
  // indicator boundary, so half their mass bounds the resolution error
  return {inside / total, 0.5 * boundary / total};
}

FractionEstimate fraction_columns(const EnsembleDistribution& dist,
                                  const std::function<bool(const HiddenVariable&)>& ind,
                                  int ncol, int scan) {
  if (ncol < 2 || scan < 3) throw std::invalid_argument("columns method needs ncol>=2, scan>=3");
  const double hw = dist.delta() / 2;
  const double colw = dist.delta() / ncol;
  const double inset = 1e-9 * dist.delta();

  const double integral = parallel_chunked<double>(
      ncol, 0.0,
      [&](std::uint64_t c, double& acc) {
        const double x = -hw + (static_cast<double>(c) + 0.5) * colw;
        std::vector<double> ys(scan);
        std::vector<char> vals(scan);
        for (int k = 0; k < scan; ++k) {
          ys[k] = -hw + inset + (dist.delta() - 2 * inset) * k / (scan - 1);
          vals[k] = ind({x, ys[k]});
        }
        double mass = 0.0;
        for (int k = 0; k + 1 < scan; ++k) {
          double lo = ys[k], hi = ys[k + 1];
          if (vals[k] == vals[k + 1]) {
            if (vals[k]) mass += dist.column_mass(x, lo, hi);
            continue;
          }
          double a = lo, b = hi;
          const bool va = vals[k];
          for (int it = 0; it < 60 && b - a > 1e-15 * dist.delta(); ++it) {
            const double mid = 0.5 * (a + b);
            (ind({x, mid}) == va ? a : b) = mid;
          }
          const double cut = 0.5 * (a + b);
          if (vals[k]) mass += dist.column_mass(x, lo, cut);
          if (vals[k + 1]) mass += dist.column_mass(x, cut, hi);
        }
        acc += mass * colw;
      },
      [](double& total, const double& p) { total += p; });

  // composite midpoint over piecewise-linear column masses; the kink cells
  // dominate the error
  const double err = 1.0 / (static_cast<double>(ncol) * ncol);
  return {integral, err};
}

}  // namespace

FractionEstimate region_fraction(const EnsembleDistribution& dist,
                                 const std::function<bool(const HiddenVariable&)>& indicator,
                                 const Method& method) {
  switch (method.kind) {
    case Method::Kind::Mc: return fraction_mc(dist, indicator, method.n, method.seed);
    case Method::Kind::Grid: return fraction_grid(dist, indicator, method.m);
    case Method::Kind::Columns:
      return fraction_columns(dist, indicator, method.ncol, method.scan);
  }
  throw std::logic_error("unreachable");
}

}  // namespace eprsim
