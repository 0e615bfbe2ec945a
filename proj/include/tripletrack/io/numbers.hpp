#pragma once

#include <string>
#include <string_view>

namespace tripletrack::io {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Strict parse of a whole field; throws std::invalid_argument on junk.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace tripletrack::io
