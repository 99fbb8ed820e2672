#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace polygrow {

// One measured quantity against one pinned bound.
struct CriterionCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  std::string relation;  // how measured relates to bound when passing
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CriterionCheck> checks;
  bool pass = true;
  double seconds = 0.0;
};

struct Verdict {
  std::string suite;
  std::vector<CriterionResult> criteria;
  bool pass = true;
  double seconds = 0.0;
};

// Runs the acceptance suite. "fast" covers the criteria that need no heavy
// solves (1, 11, 12); "full" runs all twelve. workdir receives the run
// directories the suite constructs; it is wiped first, so give it a scratch
// path. progress, when set, is called once per finished criterion.
Verdict run_acceptance(const std::string& suite, const std::filesystem::path& workdir,
                       const std::function<void(const CriterionResult&)>& progress = {});

std::string verdict_to_json(const Verdict& verdict);

}  // namespace polygrow
