// liarlab: scenario runner for Von Neumann measurement-chain experiments.
//
//   liarlab run --scenario s.json --format csv --out results.csv
//
// Exit codes: 0 success, 2 validation error, 3 runtime error, 4 I/O error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "liarlab/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw liarlab::IoError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum liar-state measurement-chain simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string format = "csv";
  std::string out_path;
  bool renormalize = false;

  CLI::App* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("--scenario", scenario_path, "Scenario JSON path")
      ->required();
  run->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--out", out_path, "Output path ('-' for stdout)");
  run->add_flag("--renormalize", renormalize,
                "Accept non-normalized g and renormalize");

  CLI11_PARSE(app, argc, argv);

  try {
    std::string text = read_file(scenario_path);
    liarlab::Scenario scenario = liarlab::parse_scenario(text, renormalize);
    liarlab::ResultTable table = liarlab::run_scenario(scenario);
    const liarlab::OutputFormat fmt = format == "json"
                                          ? liarlab::OutputFormat::Json
                                          : liarlab::OutputFormat::Csv;
    std::string dest = !out_path.empty() ? out_path : scenario.out_path;
    if (dest.empty() || dest == "-") {
      std::cout << liarlab::render(table, fmt);
    } else {
      liarlab::emit(table, fmt, dest);
    }
    return 0;
  } catch (const liarlab::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const liarlab::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const liarlab::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
