#include "apml/csv.hpp"

#include <array>
#include <charconv>

namespace apml {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_number(double v, int significant_digits) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                           std::chars_format::general, significant_digits);
  return std::string(buf.data(), res.ptr);
}

} // namespace apml
