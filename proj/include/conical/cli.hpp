#pragma once

namespace conical::cli {

// Exit codes
inline constexpr int kOk = 0;
inline constexpr int kInvalidInput = 2;
inline constexpr int kNumerical = 3;

int run(int argc, char** argv);

}  // namespace conical::cli
