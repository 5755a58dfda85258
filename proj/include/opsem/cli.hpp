// Command-line surface. run_cli is the whole program: parse and validate
// signature files, rigidify Howe-style rules, evaluate with traces, check
// bisimilarity and relation files, run the Howe and congruence sweeps, and
// enumerate terms. Reports are JSON with a text rendering; --json selects
// the machine format.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opsem {

// Exit status: 0 all holds/ok, 1 definite failure, 2 inconclusive only,
// 3 usage or parse error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opsem
