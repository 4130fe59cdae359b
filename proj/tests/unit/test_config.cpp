#include "doctest.h"
#include "emod/config.hpp"
#include "emod/error.hpp"
#include "util.hpp"

using namespace emod;

TEST_SUITE("config") {
  TEST_CASE("defaults and overrides") {
    RunConfig c = parse_config("seed = 7\n[plan]\ncases = 12\n[fit]\nalpha = 0.05\nnonneg = true\n");
    CHECK(c.seed == 7);
    CHECK(c.cases == 12);
    CHECK(c.fit.alpha == 0.05);
    CHECK(c.fit.nonneg);
    CHECK(c.repeats == 10);
  }

  TEST_CASE("unknown keys and wrong types are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_config("[plan]\ncasez = 3\n"), doctest::Contains("casez"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("bogus = 1\n"), doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[plan]\ncases = \"many\"\n"), doctest::Contains("plan.cases"), ConfigError);
    CHECK_THROWS_AS(parse_config("[device]\nsensor = \"magic\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = = 1\n"), ConfigError);
  }

  TEST_CASE("hash is stable and ignores output placement") {
    RunConfig a = parse_config("seed = 3\n[output]\ndir = \"x\"\n");
    RunConfig b = parse_config("seed = 3\n[output]\ndir = \"y\"\n");
    RunConfig c = parse_config("seed = 4\n");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);
    b.jobs = 4;
    CHECK(config_hash(a) == config_hash(b));
  }

  TEST_CASE("demo config resolves the program next to it") {
    RunConfig c = load_config(testing::fixture("demo.toml"));
    CHECK(c.program_path == testing::fixture("game_loop.mj"));
    CHECK(c.output_dir == "emod-demo");
    CHECK(c.variants.size() == 4);
    CHECK(c.variant_costs.count("Lib:FloatBuffer.putBuffer") == 1);
    CHECK_THROWS_AS(load_config("/nonexistent/none.toml"), ConfigError);
  }
}
