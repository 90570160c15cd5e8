// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phdf/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  phdf::AcceptanceOptions opts;
  app.add_option("--seed", opts.seed, "master seed");
  app.add_option("--workers", opts.workers, "worker threads");
  app.add_option("--only", opts.only, "criterion ids to run");
  app.add_option("--scratch", opts.scratch, "directory for determinism outputs");
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (const auto& r : phdf::run_acceptance(opts)) {
    std::cout << phdf::format_result(r) << std::endl;
    all = all && r.pass;
  }
  std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << std::endl;
  return all ? 0 : 1;
}
