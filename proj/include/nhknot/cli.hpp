#pragma once

namespace nhknot {

inline constexpr const char* kVersion = "0.1.0";

// Entry point of the nhknot tool. Exit codes: 0 success, 1 usage error, 2 numerical error.
int run_cli(int argc, char** argv);

}  // namespace nhknot
