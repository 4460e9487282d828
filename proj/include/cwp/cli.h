#ifndef CWP_CLI_H_
#define CWP_CLI_H_

namespace cwp::cli {

// Exit codes: 0 success, 1 usage or config error, 2 data error, 3 endpoint
// error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitEndpoint = 3;

// Entry point of the cwp binary; never throws.
int run(int argc, const char* const* argv);

}  // namespace cwp::cli

#endif  // CWP_CLI_H_
