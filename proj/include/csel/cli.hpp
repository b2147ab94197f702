#ifndef CSEL_CLI_HPP
#define CSEL_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace csel {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitOracle = 3;

/// Runs one subcommand; args excludes the program name. Diagnostics go to err.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csel

#endif  // CSEL_CLI_HPP
