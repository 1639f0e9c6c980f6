#include "sva/number.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "sva/util.hpp"

namespace sva {

std::string_view to_string(Number n) noexcept {
  return n == Number::Singular ? "singular" : "plural";
}

Number parse_number(std::string_view s) {
  const std::string f = fold_case(s);
  if (f == "singular" || f == "sg") return Number::Singular;
  if (f == "plural" || f == "pl") return Number::Plural;
  throw std::invalid_argument("unknown grammatical number '" + std::string(s) + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace sva
