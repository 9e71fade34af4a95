#pragma once

#include <string_view>
#include <vector>

namespace adl::cli {

/// Parses a parameter grid:
///   "log:a:b:n"   n geometrically spaced points from a to b
///   "lin:a:b:n"   n evenly spaced points from a to b
///   "list:x,y,z"  explicit values (the "list:" prefix is optional)
/// Throws ParameterError on malformed input.
std::vector<double> parse_grid(std::string_view text);

} // namespace adl::cli
