#pragma once

#include <string>

namespace apml {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Fixed significant-digit rendering.
std::string format_number(double v, int significant_digits);

} // namespace apml
