#pragma once

namespace adl::cli {

/// Entry point of the `adl` command. Returns the process exit code:
/// 0 success, 2 configuration error, 3 data error, 4 numerical error.
int run(int argc, const char* const* argv);

} // namespace adl::cli
