#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "liarlab/harness.hpp"

using namespace liarlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

const char* kSweepScenario = R"({
  "n": 2,
  "g": [[0.7071067811865476, 0], [0.7071067811865476, 0]],
  "experiment": "sweep",
  "perturbation": {"k": 1}
})";

}  // namespace

TEST_CASE("parse_scenario applies documented defaults") {
  Scenario s = parse_scenario(kSweepScenario);
  CHECK(s.n == 2);
  CHECK(s.completion.kind == CompletionSpec::Kind::PointerShift);
  CHECK(s.seed == 0);
  REQUIRE(s.grid.size() == 11);
  CHECK(s.grid.front() == 0.0);
  CHECK(s.grid.back() == Catch::Approx(0.5).margin(1e-15));
  CHECK(s.perturbed_label == 1);
}

TEST_CASE("parse_scenario rejects invalid documents") {
  CHECK_THROWS_AS(parse_scenario("{not json"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"experiment":"sweep"})"), ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"n":1, "experiment":"sweep"})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(
          R"({"n":2, "g":[[1,0],[1,0]], "experiment":"sweep"})"),
      ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"n":2, "experiment":"fly"})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(R"({"n":2, "experiment":"sweep", "perturbation":{"k":3}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(
          R"({"n":2, "experiment":"sweep", "perturbation":{"epsilons":[0.5,0.2]}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(
          R"({"n":2, "experiment":"classify",
              "completion":{"type":"permutation", "table":[0,1,2,3,4,5]}})"),
      ValidationError);
}

TEST_CASE("renormalize accepts unnormalized g") {
  Scenario s = parse_scenario(
      R"({"n":2, "g":[[1,0],[1,0]], "experiment":"sweep", "renormalize":true})");
  CHECK(std::abs(s.g[0] - cplx{1.0 / std::sqrt(2.0), 0}) <= 1e-15);
  Scenario forced = parse_scenario(
      R"({"n":2, "g":[[1,0],[1,0]], "experiment":"sweep"})", true);
  CHECK(std::abs(forced.g[0] - cplx{1.0 / std::sqrt(2.0), 0}) <= 1e-15);
}

TEST_CASE("run_scenario: sweep, budget, repeat, classify, decohere tables") {
  Scenario sweep = parse_scenario(kSweepScenario);
  ResultTable t = run_scenario(sweep);
  REQUIRE(t.columns ==
          std::vector<std::string>{"epsilon", "liar_weight", "ready_residual",
                                   "born_tv"});
  REQUIRE(t.rows.size() == 11);
  CHECK(t.rows[0][1].text == "0");  // liar weight at ε = 0

  ResultTable budget = run_scenario(
      parse_scenario(R"({"n":2, "experiment":"budget"})"));
  REQUIRE(budget.rows.size() == 1);
  CHECK(budget.rows[0][1].text == "pointer_shift");
  CHECK(budget.rows[0][2].text == "2");

  ResultTable repeat = run_scenario(parse_scenario(
      R"({"n":2, "experiment":"repeat",
          "perturbation":{"k":1, "epsilons":[0.3]}})"));
  REQUIRE(repeat.rows.size() == 1);
  CHECK(std::stod(repeat.rows[0][2].text) ==
        Catch::Approx(0.045).margin(1e-12));

  ResultTable classify = run_scenario(
      parse_scenario(R"({"n":2, "experiment":"classify"})"));
  CHECK(classify.rows.size() == 4);

  ResultTable decohere = run_scenario(parse_scenario(
      R"({"n":2, "experiment":"decohere", "perturbation":{"m":1}})"));
  CHECK(decohere.rows.size() == 11);
  CHECK(decohere.columns[1] == "env_liar_weight");
}

TEST_CASE("emit: formats, determinism, round trip") {
  auto dir = std::filesystem::temp_directory_path();
  auto csv1 = dir / "liarlab_t1.csv";
  auto csv2 = dir / "liarlab_t2.csv";
  auto json1 = dir / "liarlab_t1.json";

  Scenario s = parse_scenario(kSweepScenario);
  ResultTable t = run_scenario(s);
  emit(t, OutputFormat::Csv, csv1.string());
  emit(run_scenario(parse_scenario(kSweepScenario)), OutputFormat::Csv,
       csv2.string());
  CHECK(slurp(csv1) == slurp(csv2));

  std::string csv = slurp(csv1);
  CHECK(csv.rfind("# tool_version:", 0) == 0);
  CHECK(csv.find("epsilon,liar_weight,ready_residual,born_tv") !=
        std::string::npos);

  emit(t, OutputFormat::Json, json1.string());
  auto doc = nlohmann::json::parse(slurp(json1));
  REQUIRE(doc["columns"]["liar_weight"].size() == 11);
  // 17-digit decimals round-trip losslessly through the JSON form
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    CHECK(doc["columns"]["liar_weight"][r].get<double>() ==
          std::stod(t.rows[r][1].text));

  std::filesystem::remove(csv1);
  std::filesystem::remove(csv2);
  std::filesystem::remove(json1);

  CHECK_THROWS_AS(emit(t, OutputFormat::Csv, "/nonexistent/dir/out.csv"),
                  IoError);
}

TEST_CASE("empty table renders header and metadata only") {
  ResultTable t;
  t.columns = {"a", "b"};
  t.scenario_digest = "deadbeef";
  std::string csv = render(t, OutputFormat::Csv);
  CHECK(csv.find("a,b\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // 3 metadata + header
}
