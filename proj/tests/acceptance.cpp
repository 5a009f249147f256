#include "gravalloc/suites.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

using namespace gravalloc;

// One line per criterion. Exit status: 0 all pass, 2 any failure, 3 only censored.
// ACCEPTANCE_ONLY=3,7 runs a subset.
int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  SuiteOptions opt;
  opt.full = true;
  if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 10);

  std::string only;
  if (const char* e = std::getenv("ACCEPTANCE_ONLY")) only = "," + std::string(e) + ",";

  int fails = 0, censored = 0;
  for (int i = 1; i <= kCriteria; ++i) {
    if (!only.empty() && only.find("," + std::to_string(i) + ",") == std::string::npos) continue;
    auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = run_criterion(i, opt);
    } catch (const std::exception& e) {
      c.name = criterion_title(i);
      c.status = Status::Fail;
      c.summary = std::string("error: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = c.status == Status::Pass ? "PASS" : (c.status == Status::Fail ? "FAIL" : "CENSORED");
    std::printf("[%s] %2d %s: %s (%.0fs)\n", tag, i, criterion_title(i).c_str(), c.summary.c_str(), secs);
    fails += c.status == Status::Fail;
    censored += c.status == Status::Censored;
  }
  std::printf("%d failed, %d censored\n", fails, censored);
  return fails ? 2 : (censored ? 3 : 0);
}
