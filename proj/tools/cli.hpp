#pragma once

#include <string>
#include <vector>

namespace opfcut::cli {

inline constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 1 input/parse error, 2 LP failure, 3 proven infeasible
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 1;
inline constexpr int kExitLpFailure = 2;
inline constexpr int kExitInfeasible = 3;

int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, char** argv);

}  // namespace opfcut::cli
