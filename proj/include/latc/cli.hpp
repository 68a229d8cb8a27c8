#ifndef LATC_CLI_HPP
#define LATC_CLI_HPP

namespace latc {

// Runs the latc command-line tool and returns the process exit code:
// 0 success, 1 usage error, 2 data error, 3 numerical error.
int run_cli(int argc, const char* const* argv);

}  // namespace latc

#endif  // LATC_CLI_HPP
