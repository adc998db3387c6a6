#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "thermodiff/harness/commands.hpp"
#include "thermodiff/harness/config.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> seed_env;
  if (const char* s = std::getenv(thermodiff::harness::kSeedEnvVar)) seed_env = s;
  return thermodiff::harness::run(args, std::cout, std::cerr, seed_env);
}
