#include <cstdint>
#include <iostream>
#include <vector>

#include "CLI11.hpp"
#include "needle/acceptance.hpp"
#include "needle/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"needle acceptance suite"};
  std::uint64_t seed = 1;
  std::vector<int> only;
  int threads = 4;
  app.add_option("--seed", seed, "Seed for all random draws");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 9));
  app.add_option("--threads", threads, "Worker threads (NEEDLE_THREADS overrides)")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  needle::set_thread_count(threads);

  bool all = true;
  for (const auto& r : needle::run_acceptance(seed, only)) {
    std::cout << needle::format_result(r) << std::endl;
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
