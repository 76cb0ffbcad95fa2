#pragma once

#include <string>
#include <string_view>

namespace otamm {

// Parses "10.5p", "-3u", "2.05M", "1e-9", "4.7µ". Suffixes are case sensitive
// (m = milli, M = mega). Throws ParseError on anything else.
double parse_eng(std::string_view text);

// Shortest round-trippable decimal form ("%.17g" trimmed), locale independent.
std::string format_double(double v);

}  // namespace otamm
