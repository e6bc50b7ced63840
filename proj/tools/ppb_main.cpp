#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ppb/report.hpp"

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ppb::ParseError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Peripheral Poisson boundary analyzer for unital completely positive "
      "maps on matrix algebras"};
  std::string input = "-";
  std::vector<std::string> commands;
  std::string format = "json";
  double tol_eq = -1.0;
  double tol_peripheral = -1.0;
  std::int64_t seed = -1;

  app.add_option("--input", input, "request JSON file, '-' for stdin");
  app.add_option("--command", commands,
                 "analysis to run (validate, spectrum, decompose, boundary, "
                 "classify, all); repeatable, merged with the request");
  app.add_option("--tol-eq", tol_eq, "override the matrix equality tolerance");
  app.add_option("--tol-peripheral", tol_peripheral,
                 "override the unit-circle distance tolerance");
  app.add_option("--seed", seed, "override the request seed");
  app.add_option("--format", format, "output format: json or text")
      ->check(CLI::IsMember({"json", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    ppb::CliOverrides overrides;
    if (tol_eq > 0) overrides.eq_tol = tol_eq;
    if (tol_peripheral > 0) overrides.peripheral_tol = tol_peripheral;
    if (seed >= 0) overrides.seed = static_cast<std::uint64_t>(seed);
    overrides.commands = commands;

    const ppb::AnalysisRequest request =
        ppb::parse_request(read_input(input), overrides);
    const ppb::AnalysisReport report = ppb::run(request);
    std::cout << ppb::emit(report, format == "json" ? ppb::EmitFormat::json
                                                    : ppb::EmitFormat::text);
    return ppb::exit_code(report);
  } catch (const ppb::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
