// Acceptance battery: one PASS/FAIL line per criterion.
//
//   acceptance [--seed S] [--scale F] [--only 1,5,12]

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>

#include "lamlab/suite.hpp"

int main(int argc, char** argv) {
  lamlab::SuiteOptions opts;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (!std::strcmp(argv[i], "--seed")) {
      opts.seed = std::strtoull(argv[i + 1], nullptr, 10);
    } else if (!std::strcmp(argv[i], "--scale")) {
      opts.trial_scale = std::strtod(argv[i + 1], nullptr);
    } else if (!std::strcmp(argv[i], "--only")) {
      std::stringstream ss(argv[i + 1]);
      std::string id;
      while (std::getline(ss, id, ',')) opts.only.push_back(std::stoi(id));
    } else {
      std::cerr << "usage: acceptance [--seed S] [--scale F] [--only ids]\n";
      return 1;
    }
  }
  int failed = 0;
  for (int id : opts.only.empty() ? lamlab::suite_criteria() : opts.only) {
    const lamlab::CriterionResult r = lamlab::run_criterion(id, opts);
    if (!r.passed) ++failed;
    std::cout << "criterion " << r.id << " [" << r.name << "]: " << (r.passed ? "PASS" : "FAIL") << "  "
              << r.summary << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
