#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jpa::cli {

// Exit codes: 0 success, 2 validation error, 3 numerical error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

// args[0] is the program name. The summary goes to `out`, errors (as a JSON
// block) to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace jpa::cli
