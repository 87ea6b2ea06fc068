// Command-line entry point, shared by the vocovar binary and the tests.
//
// Subcommands: simulate, validate, solve, marginals, trend, covis.
// Exit codes: 0 ok, 2 usage, 3 parse/validation, 4 numerical, 5 I/O.

#ifndef VOCOVAR_CLI_HPP
#define VOCOVAR_CLI_HPP

#include <string>
#include <vector>

namespace vocovar {

// args excludes the program name.
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, const char* const* argv);

}  // namespace vocovar

#endif  // VOCOVAR_CLI_HPP
