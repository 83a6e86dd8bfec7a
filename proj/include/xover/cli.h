#ifndef XOVER_CLI_H_
#define XOVER_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace xover {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;

// Subcommands: screen, scale, crossover, rcql, bench-corr, bench-rcql,
// simulate-acr, simulate-study, serve. Returns the process exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int RunCli(int argc, char** argv);

}  // namespace xover

#endif  // XOVER_CLI_H_
