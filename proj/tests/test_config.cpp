#include <doctest.h>

#include <sstream>

#include "irlv/config.hpp"

using namespace irlv;

namespace {

const std::filesystem::path kConfigs = IRLV_CONFIG_DIR;

constexpr const char* kSeeds = "[seeds]\nfield = 1\ndataset = 2\ninit = 3\npso = 4\n";

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped configs load") {
  const RunConfig c = load_config(kConfigs / "paper.cfg");
  CHECK(c.layout.map_side_m == 525);
  CHECK(c.base_stations.size() == 5);
  CHECK(c.roi == Rectangle({127.5, 127.5}, {255, 255}));
  CHECK(c.channel.carrier_hz == 2.12e9);
  CHECK(c.channel.sigma_db == 8);
  CHECK(c.channel.decorrelation_m == 75);
  CHECK(c.nn.hidden_neurons == 8);
  CHECK(c.pso.particles == 6);
  CHECK(c.pso.inertia == 0.7298);
  CHECK(c.pso.mode == PlanMode::Both);
  CHECK(c.eval.sweep_hidden_neurons == std::vector<int>{2, 4, 8, 16});
  CHECK(c.seeds.pso == 4);
  CHECK_NOTHROW(c.street_scenario());
  CHECK(c.circular_scenario().r_min() == doctest::Approx(4.0));
  CHECK_NOTHROW(load_config(kConfigs / "smoke.cfg"));
}

TEST_CASE("defaults follow the layout") {
  const RunConfig c = parse(std::string(kSeeds) + "[scenario]\nmap_side_m = 525\n");
  CHECK(c.roi == StreetScenario::default_roi(c.layout));
  CHECK(c.base_stations == StreetScenario::default_base_stations(c.layout));
  CHECK(c.pso.mode == PlanMode::Both);
  // Only the seeds are required.
  RunConfig d;
  d.seeds = {1, 2, 3, 4};
  CHECK(parse(kSeeds).canonical() == d.canonical());
}

TEST_CASE("errors name the offending key") {
  CHECK(error_of(std::string(kSeeds) + "[nn]\nepochs = many\n").rfind("nn.epochs: ", 0) == 0);
  CHECK(error_of(std::string(kSeeds) + "[nn]\nfoo = 1\n") == "nn.foo: unknown key");
  CHECK(error_of(std::string(kSeeds) + "[bogus]\nx = 1\n") == "bogus.x: unknown key");
  CHECK(error_of("[seeds]\nfield = 1\ndataset = 2\ninit = 3\n") == "seeds.pso: missing required key");
  CHECK(error_of(std::string(kSeeds) + "[nn]\nlearning_rate = inf\n").find("finite") != std::string::npos);
  CHECK(error_of(std::string(kSeeds) + "[dataset]\np0 = 1.5\n").rfind("dataset.p0: ", 0) == 0);
  CHECK(error_of(std::string(kSeeds) + "[pso]\nobjective = fastest\n").rfind("pso.objective: ", 0) == 0);
  CHECK(error_of(std::string(kSeeds) + "[scenario]\nbs = 1, 2; 3\n").rfind("scenario.bs: ", 0) == 0);
  CHECK(error_of(std::string(kSeeds) + "[scenario]\nroi = 0, 0, 600, 600\n").rfind("scenario: ", 0) == 0);
  CHECK(error_of(std::string(kSeeds) + "[channel]\ngrid_spacing_m = 20\n") ==
        "channel.grid_spacing_m: grid too coarse for d_c");
  CHECK(error_of(std::string(kSeeds) + "[eval]\nfield_export = 600\n").rfind("eval.field_export", 0) == 0);
  CHECK(error_of(std::string(kSeeds) + "[eval]\nsweep_train_sizes = \n").rfind("eval.sweep_train_sizes", 0) == 0);
  CHECK(error_of("[seeds\n").rfind("line 1: ", 0) == 0);
  CHECK_THROWS_AS(load_config(kConfigs / "missing.cfg"), ConfigError);
}

TEST_CASE("two-stage objective") {
  CHECK(parse(std::string(kSeeds) + "[pso]\nobjective = two-stage\n").pso.mode == PlanMode::TwoStage);
  for (PlanMode m : {PlanMode::CrossEntropy, PlanMode::Auc, PlanMode::Both, PlanMode::TwoStage})
    CHECK(parse(std::string(kSeeds) + "[pso]\nobjective = " + plan_mode_name(m) + "\n").pso.mode == m);
}

TEST_CASE("canonical form and hash") {
  const RunConfig a = load_config(kConfigs / "paper.cfg");
  // Reordering, comments and spacing do not change the hash.
  const RunConfig b = parse(std::string("; comment\n[seeds]\npso=4\ninit=3\ndataset=2\nfield=1\n") +
                            "[nn]\n  hidden_neurons   =  8\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 64);
  RunConfig c = a;
  c.seeds.pso = 5;
  CHECK(c.hash() != a.hash());
  // The canonical listing parses back to the same settings.
  std::string ini;
  std::string section;
  std::istringstream lines(a.canonical());
  for (std::string line; std::getline(lines, line);) {
    const auto dot = line.find('.');
    const std::string s = line.substr(0, dot);
    if (s != section) ini += "[" + (section = s) + "]\n";
    ini += line.substr(dot + 1) + "\n";
  }
  CHECK(parse(ini).hash() == a.hash());
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("placement snippet parses back") {
  const std::vector<Position> p{{10.25, 262.5}, {300, 1.0 / 3}};
  const RunConfig c = parse(std::string(kSeeds) + placement_snippet(p));
  REQUIRE(c.base_stations.size() == 2);
  CHECK(c.base_stations[0] == p[0]);
  CHECK(c.base_stations[1] == p[1]);
}
