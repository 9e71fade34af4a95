#include "grid.hpp"

#include "adl/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <string>

namespace adl::cli {

namespace {

double to_real(std::string_view s, std::string_view whole)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParameterError(fmt::format("bad number '{}' in grid '{}'", s, whole));
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

} // namespace

std::vector<double> parse_grid(std::string_view text)
{
    if (text.empty())
        throw ParameterError("empty grid");
    const bool is_log = text.starts_with("log:");
    if (is_log || text.starts_with("lin:")) {
        const auto parts = split(text.substr(4), ':');
        if (parts.size() != 3)
            throw ParameterError(fmt::format("grid '{}' must look like {}:a:b:n", text, text.substr(0, 3)));
        const double a = to_real(parts[0], text);
        const double b = to_real(parts[1], text);
        const double nd = to_real(parts[2], text);
        if (nd < 1.0 || nd != std::floor(nd))
            throw ParameterError(fmt::format("grid '{}' needs a positive integer point count", text));
        const auto n = static_cast<std::size_t>(nd);
        if (is_log && !(a > 0.0 && b > 0.0))
            throw ParameterError(fmt::format("log grid '{}' needs positive end points", text));
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            out[i] = is_log ? a * std::pow(b / a, t) : a + t * (b - a);
        }
        if (n > 1) {
            out.front() = a;
            out.back() = b;
        }
        return out;
    }
    if (text.starts_with("list:"))
        text.remove_prefix(5);
    std::vector<double> out;
    for (auto part : split(text, ','))
        out.push_back(to_real(part, text));
    return out;
}

} // namespace adl::cli
