#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <unistd.h>

#include "config.hpp"

using namespace eprsim;
using cli::KeyValues;
using cli::RunConfig;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
           "/eprsim_test_cfg_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()++) + ".cfg";
    std::ofstream(path) << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("defaults") {
  const RunConfig rc = cli::resolve_config({}, {});
  CHECK(rc.packet.width == 1.0);
  CHECK(rc.couplings.a_a == 1.0);
  CHECK(rc.couplings.a_b == 1.0);
  CHECK(rc.method.kind == Method::Kind::Mc);
  CHECK(rc.method.n == 1'000'000);
  CHECK(rc.method.seed == 42);
  CHECK(rc.mode == InteractionMode::VonNeumann);
  CHECK(rc.theta_b_prime == doctest::Approx(kPi / 2));
  CHECK(rc.output_format == "csv");
}

TEST_CASE("flags override the file") {
  TempFile f("couplings.a_b = 0.5\nsettings.theta_b = 30\n");
  const KeyValues file = cli::parse_config_file(f.path);
  const RunConfig from_file = cli::resolve_config(file, {});
  CHECK(from_file.couplings.a_b == 0.5);
  CHECK(from_file.theta_b == doctest::Approx(kPi / 6));

  const RunConfig merged = cli::resolve_config(file, {{"couplings.a_b", "1"}});
  CHECK(merged.couplings.a_b == 1.0);
  CHECK(merged.theta_b == doctest::Approx(kPi / 6));  // file value survives
}

TEST_CASE("validation names the offending key") {
  try {
    cli::resolve_config({{"packet.width", "-2"}}, {});
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("packet.width") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::resolve_config({{"couplings.a_a", "zero"}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(cli::resolve_config({{"settings.mode", "telepathic"}}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(cli::resolve_config({{"method.kind", "dice"}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(cli::resolve_config({{"output.format", "xml"}}, {}), std::invalid_argument);
}

TEST_CASE("config file syntax") {
  TempFile f("# comment\n\nsettings.theta_a = 45  # trailing comment\n");
  const KeyValues kv = cli::parse_config_file(f.path);
  CHECK(kv.at("settings.theta_a") == "45");
  TempFile bad("settings.theta_a 45\n");
  CHECK_THROWS_AS(cli::parse_config_file(bad.path), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_config_file("/nonexistent/path.cfg"), std::invalid_argument);
}

TEST_CASE("angle units") {
  const RunConfig deg = cli::resolve_config({{"settings.theta_b", "90"}}, {});
  CHECK(deg.theta_b == doctest::Approx(kPi / 2));
  const RunConfig rad =
      cli::resolve_config({{"settings.units", "rad"}, {"settings.theta_b", "1.25"}}, {});
  CHECK(rad.theta_b == 1.25);
}

TEST_CASE("seed from the environment when not set explicitly") {
  ::setenv("EPRSIM_SEED", "777", 1);
  const RunConfig rc = cli::resolve_config({}, {});
  CHECK(rc.method.seed == 777);
  const RunConfig explicit_seed = cli::resolve_config({{"method.seed", "5"}}, {});
  CHECK(explicit_seed.method.seed == 5);
  ::unsetenv("EPRSIM_SEED");
  const RunConfig back = cli::resolve_config({}, {});
  CHECK(back.method.seed == 42);
}

TEST_CASE("distribution construction from config") {
  const RunConfig rc = cli::resolve_config(
      {{"ensemble.kind", "half-square"}, {"ensemble.side", "right"}}, {});
  const EnsembleDistribution d = rc.make_distribution();
  CHECK(d.kind() == EnsembleDistribution::Kind::HalfSquare);
  CHECK(d.density(0.25, 0.0) == doctest::Approx(2.0));
  CHECK(d.density(-0.25, 0.0) == 0.0);

  CHECK_THROWS_AS(
      cli::resolve_config({{"ensemble.kind", "warp"}}, {}).make_distribution(),
      std::invalid_argument);
}
