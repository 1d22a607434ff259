#include "config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace eprsim::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config key `" + key + "`: " + why);
}

double as_double(const KeyValues& kv, const std::string& key, double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) bad(key, "trailing characters in `" + it->second + "`");
    return v;
  } catch (const std::invalid_argument&) {
    bad(key, "not a number: `" + it->second + "`");
  } catch (const std::out_of_range&) {
    bad(key, "out of range: `" + it->second + "`");
  }
}

std::uint64_t as_u64(const KeyValues& kv, const std::string& key, std::uint64_t fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (...) {
    bad(key, "not a nonnegative integer: `" + it->second + "`");
  }
}

std::string as_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

}  // namespace

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                                 ": empty key");
    kv[key] = value;
  }
  return kv;
}

RunConfig resolve_config(const KeyValues& file, const KeyValues& flags) {
  KeyValues kv = file;
  for (const auto& [k, v] : flags) kv[k] = v;  // flags override the file

  RunConfig rc;
  rc.units = as_string(kv, "settings.units", "deg");
  if (rc.units != "deg" && rc.units != "rad") bad("settings.units", "expected deg or rad");
  const double unit = rc.units == "deg" ? kPi / 180.0 : 1.0;

  rc.theta_a = unit * as_double(kv, "settings.theta_a", 0.0);
  rc.theta_b = unit * as_double(kv, "settings.theta_b", 0.0);
  rc.theta_a_prime = unit * as_double(kv, "settings.theta_a_prime",
                                      rc.units == "deg" ? -90.0 : -kPi / 2 / unit);
  rc.theta_b_prime = unit * as_double(kv, "settings.theta_b_prime",
                                      rc.units == "deg" ? 90.0 : kPi / 2 / unit);

  const std::string mode = as_string(kv, "settings.mode", "von-neumann");
  if (mode == "von-neumann")
    rc.mode = InteractionMode::VonNeumann;
  else if (mode == "stern-gerlach")
    rc.mode = InteractionMode::SternGerlach;
  else
    bad("settings.mode", "expected von-neumann or stern-gerlach");

  const double a_a = as_double(kv, "couplings.a_a", 1.0);
  const double a_b = as_double(kv, "couplings.a_b", 1.0);
  if (!(a_a > 0.0)) bad("couplings.a_a", "must be positive");
  if (!(a_b > 0.0)) bad("couplings.a_b", "must be positive");
  rc.couplings = CouplingProfile{a_a, a_b};

  const double width = as_double(kv, "packet.width", 1.0);
  if (!(width > 0.0)) bad("packet.width", "must be positive");
  rc.packet = PacketSpec{width};

  rc.ensemble_kind = as_string(kv, "ensemble.kind", "equilibrium");
  rc.ensemble_side = as_string(kv, "ensemble.side", "right");
  rc.ensemble_quadrant = as_string(kv, "ensemble.quadrant", "top-right");
  rc.ensemble_x0 = as_double(kv, "ensemble.x0", -width / 4);
  rc.ensemble_x1 = as_double(kv, "ensemble.x1", width / 4);
  rc.ensemble_y0 = as_double(kv, "ensemble.y0", -width / 4);
  rc.ensemble_y1 = as_double(kv, "ensemble.y1", width / 4);
  rc.ensemble_tilt = as_double(kv, "ensemble.tilt", 1.0);
  rc.ensemble_r_a0 = as_double(kv, "ensemble.r_a0", 0.0);
  rc.ensemble_r_b0 = as_double(kv, "ensemble.r_b0", 0.0);
  rc.ensemble_file = as_string(kv, "ensemble.file", "");

  const std::string mk = as_string(kv, "method.kind", "mc");
  std::uint64_t default_seed = 42;
  if (const char* env = std::getenv("EPRSIM_SEED")) {
    try {
      default_seed = std::stoull(env);
    } catch (...) {
      throw std::invalid_argument("EPRSIM_SEED: not a nonnegative integer");
    }
  }
  if (mk == "mc") {
    rc.method = Method::mc(as_u64(kv, "method.n", 1'000'000),
                           as_u64(kv, "method.seed", default_seed));
    if (rc.method.n < 1) bad("method.n", "must be at least 1");
  } else if (mk == "grid") {
    rc.method = Method::grid(static_cast<int>(as_u64(kv, "method.m", 1000)));
    if (rc.method.m < 2) bad("method.m", "must be at least 2");
  } else if (mk == "columns") {
    rc.method = Method::columns(static_cast<int>(as_u64(kv, "method.columns", 2000)),
                                static_cast<int>(as_u64(kv, "method.scan", 257)));
  } else {
    bad("method.kind", "expected mc, grid or columns");
  }

  rc.output_format = as_string(kv, "output.format", "csv");
  if (rc.output_format != "csv" && rc.output_format != "json")
    bad("output.format", "expected csv or json");
  rc.output_path = as_string(kv, "output.path", "-");
  return rc;
}

EnsembleDistribution RunConfig::make_distribution() const {
  if (ensemble_kind == "equilibrium") return EnsembleDistribution::equilibrium(packet);
  if (ensemble_kind == "sub-rectangle")
    return EnsembleDistribution::sub_rectangle(packet, ensemble_x0, ensemble_x1, ensemble_y0,
                                               ensemble_y1);
  if (ensemble_kind == "half-square") {
    HalfSquareSide side;
    if (ensemble_side == "left") side = HalfSquareSide::Left;
    else if (ensemble_side == "right") side = HalfSquareSide::Right;
    else if (ensemble_side == "top") side = HalfSquareSide::Top;
    else if (ensemble_side == "bottom") side = HalfSquareSide::Bottom;
    else throw std::invalid_argument("config key `ensemble.side`: expected left/right/top/bottom");
    return EnsembleDistribution::half_square(packet, side);
  }
  if (ensemble_kind == "quadrant") {
    QuadrantId q;
    if (ensemble_quadrant == "top-right") q = QuadrantId::TopRight;
    else if (ensemble_quadrant == "top-left") q = QuadrantId::TopLeft;
    else if (ensemble_quadrant == "bottom-left") q = QuadrantId::BottomLeft;
    else if (ensemble_quadrant == "bottom-right") q = QuadrantId::BottomRight;
    else throw std::invalid_argument(
        "config key `ensemble.quadrant`: expected top-right/top-left/bottom-left/bottom-right");
    return EnsembleDistribution::quadrant(packet, q);
  }
  if (ensemble_kind == "linear-tilt") return EnsembleDistribution::linear_tilt(packet, ensemble_tilt);
  if (ensemble_kind == "point-mass")
    return EnsembleDistribution::point_mass(packet, {ensemble_r_a0, ensemble_r_b0});
  if (ensemble_kind == "grid-weights") {
    if (ensemble_file.empty())
      throw std::invalid_argument("config key `ensemble.file`: required for grid-weights");
    std::ifstream in(ensemble_file);
    if (!in) throw std::invalid_argument("config key `ensemble.file`: cannot open " + ensemble_file);
    return EnsembleDistribution::load_grid_weights(in);
  }
  throw std::invalid_argument("config key `ensemble.kind`: unknown kind `" + ensemble_kind + "`");
}

std::map<std::string, std::string> RunConfig::resolved() const {
  auto num = [](double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::map<std::string, std::string> out;
  out["settings.theta_a_rad"] = num(theta_a);
  out["settings.theta_b_rad"] = num(theta_b);
  out["settings.theta_a_prime_rad"] = num(theta_a_prime);
  out["settings.theta_b_prime_rad"] = num(theta_b_prime);
  out["settings.mode"] = mode == InteractionMode::VonNeumann ? "von-neumann" : "stern-gerlach";
  out["couplings.a_a"] = num(couplings.a_a);
  out["couplings.a_b"] = num(couplings.a_b);
  out["packet.width"] = num(packet.width);
  try {
    out["ensemble"] = make_distribution().describe();
  } catch (const std::exception&) {
    out["ensemble"] = ensemble_kind;
  }
  out["method"] = method.describe();
  out["output.format"] = output_format;
  return out;
}

}  // namespace eprsim::cli
