#pragma once

#include <cstdio>

namespace pinn {

// 17 significant digits round-trip a double exactly and print identically on
// every run, which the determinism checks rely on.
inline void format_g17(double v, char buf[32]) { std::snprintf(buf, 32, "%.17g", v); }

}  // namespace pinn
