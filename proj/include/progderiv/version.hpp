#pragma once

namespace progderiv {

inline constexpr const char* kToolVersion = "0.1.0";

// Default seed for all analysis commands. Fixed so that repeated runs are
// reproducible; pass an explicit seed (or `--seed random` on the CLI) to vary.
inline constexpr unsigned long long kDefaultSeed = 1729;

}  // namespace progderiv
