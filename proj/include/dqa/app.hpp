#pragma once

#include <iosfwd>

namespace dqa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

/// Entry point of the dqa command line tool.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dqa
