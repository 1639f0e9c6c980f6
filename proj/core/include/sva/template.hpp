#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sva {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Category { Det, Noun, Verb, StativeVerb, Prep, Comp, Conj };
enum class SlotRole { Cue, Target, Attractor, Other };

/// How a slot's number is chosen when generating. Verb slots also name the noun slot
/// they agree with (`Slot::agrees_with`); their policy mirrors that controller's.
enum class NumberPolicy { Free, SameAsCue, OppositeOfCue, NotApplicable };

inline constexpr std::size_t kCategoryCount = 7;

std::string_view to_string(Category c) noexcept;
std::string_view to_string(SlotRole r) noexcept;
std::string_view to_string(NumberPolicy p) noexcept;
Category parse_category(std::string_view s);
SlotRole parse_role(std::string_view s);
NumberPolicy parse_policy(std::string_view s);

constexpr bool carries_number(Category c) noexcept {
  return c == Category::Noun || c == Category::Verb || c == Category::StativeVerb;
}
constexpr bool is_verb(Category c) noexcept {
  return c == Category::Verb || c == Category::StativeVerb;
}

struct Slot {
  std::size_t index = 0;
  Category category = Category::Det;
  SlotRole role = SlotRole::Other;
  NumberPolicy number_policy = NumberPolicy::NotApplicable;
  std::optional<std::string> fixed_form;
  /// For verb slots: index of the noun slot that controls the verb's number.
  std::optional<std::size_t> agrees_with;

  bool operator==(const Slot&) const = default;
};

struct Template {
  std::string id;
  std::string description;
  std::vector<Slot> slots;

  std::size_t size() const noexcept { return slots.size(); }
  std::size_t cue_index() const;
  std::size_t target_index() const;
  std::optional<std::size_t> attractor_index() const;
  bool has_attractor() const { return attractor_index().has_value(); }

  bool operator==(const Template&) const = default;
};

/// Checks every structural invariant; throws TemplateError naming the template and slot.
void validate(const Template& t);

/// The eleven agreement constructions: A-I plus the B2 (overt "that") and
/// B3 (stative matrix verb) variants of B.
const std::vector<Template>& builtin_templates();

/// Throws TemplateError for an unknown id. Accepts "B-2"/"B-3" spellings.
const Template& builtin_template(std::string_view id);

std::string normalize_template_id(std::string_view id);

std::vector<Category> pos_signature(const Template& t);

nlohmann::json to_json(const Template& t);
Template template_from_json(const nlohmann::json& j);

/// File holds either one template object or an array of them.
std::vector<Template> load_templates(const std::filesystem::path& path);

/// Builtins followed by user templates (a user template may not reuse a builtin id).
std::vector<Template> merge_templates(std::vector<Template> extra);

const Template* find_template(const std::vector<Template>& set, std::string_view id);

}  // namespace sva
