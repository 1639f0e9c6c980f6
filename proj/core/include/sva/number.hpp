#pragma once

#include <cstdint>
#include <string_view>

namespace sva {

/// Grammatical number carried by nouns and by the verb forms that agree with them.
enum class Number : std::uint8_t { Singular, Plural };

constexpr Number opposite(Number n) noexcept {
  return n == Number::Singular ? Number::Plural : Number::Singular;
}

std::string_view to_string(Number n) noexcept;

/// Accepts "singular"/"plural" and the short forms "sg"/"pl". Throws std::invalid_argument.
Number parse_number(std::string_view s);

}  // namespace sva
