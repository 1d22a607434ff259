#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eprsim {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Run the full verification suite: every check of the library against its
/// known exact values, at pinned tolerances. One result per criterion; if
/// `progress` is non-null a PASS/FAIL line is streamed per criterion as it
/// completes.
std::vector<CriterionResult> run_acceptance(std::ostream* progress = nullptr);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace eprsim
