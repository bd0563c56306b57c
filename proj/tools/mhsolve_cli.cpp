#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "mhsolve/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  mhsolve::ExperimentSpec spec;
  try {
    spec = mhsolve::parse_cli(args);
  } catch (const mhsolve::HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const mhsolve::CliError& e) {
    std::cerr << "mhsolve: " << e.what() << '\n';
    return 2;
  }
  try {
    const auto manifest = mhsolve::run_experiment(spec);
    if (manifest.contains("slopes"))
      for (const auto& [m, v] : manifest["slopes"].items())
        std::cout << m << " slope " << (v.is_null() ? std::string("nan") : mhsolve::format_double(v.get<double>()))
                  << '\n';
    std::cout << "wrote results to " << spec.output_dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "mhsolve: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
