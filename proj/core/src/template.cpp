#include "sva/template.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sva/util.hpp"

namespace sva {
namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "Det", "Noun", "Verb", "StativeVerb", "Prep", "Comp", "Conj"};
constexpr std::array<std::string_view, 4> kRoleNames = {"Cue", "Target", "Attractor", "Other"};
constexpr std::array<std::string_view, 4> kPolicyNames = {"Free", "SameAsCue", "OppositeOfCue",
                                                          "NotApplicable"};

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  const std::string f = fold_case(s);
  for (std::size_t i = 0; i < N; ++i) {
    if (fold_case(names[i]) == f) return static_cast<E>(i);
  }
  throw TemplateError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

// Compact builders for the builtin table.
Slot det() { return {0, Category::Det, SlotRole::Other, NumberPolicy::NotApplicable, {}, {}}; }
Slot prep() { return {0, Category::Prep, SlotRole::Other, NumberPolicy::NotApplicable, {}, {}}; }
Slot comp() { return {0, Category::Comp, SlotRole::Other, NumberPolicy::NotApplicable, "that", {}}; }
Slot conj() { return {0, Category::Conj, SlotRole::Other, NumberPolicy::NotApplicable, "and", {}}; }
Slot noun(SlotRole role, NumberPolicy p) { return {0, Category::Noun, role, p, {}, {}}; }
Slot cue() { return noun(SlotRole::Cue, NumberPolicy::Free); }
Slot attractor() { return noun(SlotRole::Attractor, NumberPolicy::OppositeOfCue); }
Slot head() { return noun(SlotRole::Other, NumberPolicy::Free); }
Slot verb(std::size_t controller, NumberPolicy p, SlotRole role = SlotRole::Other,
          Category c = Category::Verb) {
  return {0, c, role, p, {}, controller};
}
Slot target(std::size_t cue_at) {
  return verb(cue_at, NumberPolicy::SameAsCue, SlotRole::Target);
}

Template make(std::string id, std::string description, std::vector<Slot> slots) {
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i].index = i;
  Template t{std::move(id), std::move(description), std::move(slots)};
  validate(t);
  return t;
}

std::vector<Template> build_builtins() {
  using P = NumberPolicy;
  std::vector<Template> v;
  // The boy laughs
  v.push_back(make("A", "Simple agreement", {det(), cue(), target(1)}));
  // The boy knows the girls play
  v.push_back(make("B", "In a sentential complement",
                   {det(), head(), verb(1, P::Free), det(), cue(), target(4)}));
  // The boy knows that the girls play
  v.push_back(make("B2", "In a sentential complement with overt complementizer",
                   {det(), head(), verb(1, P::Free), comp(), det(), cue(), target(5)}));
  // The boy thinks the girls play
  v.push_back(make("B3", "In a sentential complement introduced by a stative verb",
                   {det(), head(), verb(1, P::Free, SlotRole::Other, Category::StativeVerb), det(),
                    cue(), target(4)}));
  // The plate near the glasses breaks
  v.push_back(make("C", "Across a prepositional phrase",
                   {det(), cue(), prep(), det(), attractor(), target(1)}));
  // The cat that chases the mice runs
  v.push_back(make("D", "Across a subject relative clause",
                   {det(), cue(), comp(), verb(1, P::SameAsCue), det(), attractor(), target(1)}));
  // The boy smiles and laughs
  v.push_back(make("E", "In a short verb phrase coordination",
                   {det(), cue(), verb(1, P::SameAsCue), conj(), target(1)}));
  // The mouse that the cats chase runs
  v.push_back(make("F", "Across an object relative clause",
                   {det(), cue(), comp(), det(), attractor(), verb(4, P::OppositeOfCue), target(1)}));
  // The mouse that the cats chase runs (target: chase)
  v.push_back(make("G", "Within an object relative clause",
                   {det(), head(), comp(), det(), cue(), target(4), verb(1, P::Free)}));
  // The mouse the cats chase runs
  v.push_back(make("H", "Across an object relative clause (no that)",
                   {det(), cue(), det(), attractor(), verb(3, P::OppositeOfCue), target(1)}));
  // The mouse the cats chase runs (target: chase)
  v.push_back(make("I", "Within an object relative clause (no that)",
                   {det(), head(), det(), cue(), target(3), verb(1, P::Free)}));
  return v;
}

[[noreturn]] void bad(const Template& t, const std::string& msg) {
  throw TemplateError("template " + (t.id.empty() ? std::string("<unnamed>") : t.id) + ": " + msg);
}

[[noreturn]] void bad_slot(const Template& t, std::size_t i, const std::string& msg) {
  bad(t, "slot " + std::to_string(i) + ": " + msg);
}

}  // namespace

std::string_view to_string(Category c) noexcept { return kCategoryNames[static_cast<int>(c)]; }
std::string_view to_string(SlotRole r) noexcept { return kRoleNames[static_cast<int>(r)]; }
std::string_view to_string(NumberPolicy p) noexcept { return kPolicyNames[static_cast<int>(p)]; }
Category parse_category(std::string_view s) { return parse_enum<Category>(s, kCategoryNames, "category"); }
SlotRole parse_role(std::string_view s) { return parse_enum<SlotRole>(s, kRoleNames, "slot role"); }
NumberPolicy parse_policy(std::string_view s) {
  return parse_enum<NumberPolicy>(s, kPolicyNames, "number policy");
}

std::size_t Template::cue_index() const {
  for (const auto& s : slots)
    if (s.role == SlotRole::Cue) return s.index;
  throw TemplateError("template " + id + " has no cue");
}

std::size_t Template::target_index() const {
  for (const auto& s : slots)
    if (s.role == SlotRole::Target) return s.index;
  throw TemplateError("template " + id + " has no target");
}

std::optional<std::size_t> Template::attractor_index() const {
  for (const auto& s : slots)
    if (s.role == SlotRole::Attractor) return s.index;
  return std::nullopt;
}

void validate(const Template& t) {
  if (t.id.empty()) bad(t, "empty id");
  if (t.slots.empty()) bad(t, "no slots");
  int cues = 0, targets = 0, attractors = 0;
  for (std::size_t i = 0; i < t.slots.size(); ++i) {
    const Slot& s = t.slots[i];
    if (s.index != i) bad_slot(t, i, "index " + std::to_string(s.index) + " out of sequence");
    const bool closed_single = s.category == Category::Comp || s.category == Category::Conj;
    if (closed_single != s.fixed_form.has_value())
      bad_slot(t, i, "fixed_form must be set exactly for Comp/Conj slots");
    if (s.fixed_form && s.fixed_form->empty()) bad_slot(t, i, "empty fixed_form");
    if (!carries_number(s.category)) {
      if (s.number_policy != NumberPolicy::NotApplicable)
        bad_slot(t, i, std::string(to_string(s.category)) + " slot must be NotApplicable");
      if (s.role != SlotRole::Other) bad_slot(t, i, "closed-class slot cannot be " +
                                                    std::string(to_string(s.role)));
      if (s.agrees_with) bad_slot(t, i, "only verb slots agree with a controller");
      continue;
    }
    if (s.number_policy == NumberPolicy::NotApplicable)
      bad_slot(t, i, "numbered slot cannot be NotApplicable");
    switch (s.role) {
      case SlotRole::Cue: ++cues; break;
      case SlotRole::Target: ++targets; break;
      case SlotRole::Attractor: ++attractors; break;
      case SlotRole::Other: break;
    }
    if (s.category == Category::Noun) {
      if (s.agrees_with) bad_slot(t, i, "noun slots take no controller");
      if (s.role == SlotRole::Target) bad_slot(t, i, "target must be a verb");
      if (s.role == SlotRole::Attractor && s.number_policy != NumberPolicy::OppositeOfCue)
        bad_slot(t, i, "attractor must be OppositeOfCue");
    } else {
      if (s.role == SlotRole::Cue || s.role == SlotRole::Attractor)
        bad_slot(t, i, "cue and attractor must be nouns");
      if (!s.agrees_with) bad_slot(t, i, "verb slot needs agrees_with");
      const std::size_t c = *s.agrees_with;
      if (c >= t.slots.size() || t.slots[c].category != Category::Noun)
        bad_slot(t, i, "agrees_with must name a noun slot");
    }
  }
  if (cues != 1) bad(t, "needs exactly one cue, has " + std::to_string(cues));
  if (targets != 1) bad(t, "needs exactly one target, has " + std::to_string(targets));
  if (attractors > 1) bad(t, "at most one attractor allowed");
  const std::size_t cue_at = t.cue_index();
  const std::size_t target_at = t.target_index();
  if (cue_at >= target_at) bad(t, "cue must precede target");
  if (t.slots[target_at].agrees_with != cue_at) bad(t, "target must agree with the cue");
  // A verb's generation policy must match that of the noun it agrees with.
  for (const Slot& s : t.slots) {
    if (!is_verb(s.category)) continue;
    const Slot& ctl = t.slots[*s.agrees_with];
    const NumberPolicy expect =
        ctl.role == SlotRole::Cue ? NumberPolicy::SameAsCue : ctl.number_policy;
    if (s.number_policy != expect)
      bad_slot(t, s.index, "policy " + std::string(to_string(s.number_policy)) +
                               " disagrees with controller slot " + std::to_string(ctl.index));
  }
}

const std::vector<Template>& builtin_templates() {
  static const std::vector<Template> all = build_builtins();
  return all;
}

std::string normalize_template_id(std::string_view id) {
  std::string out;
  for (char c : id) {
    if (c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

const Template& builtin_template(std::string_view id) {
  if (const Template* t = find_template(builtin_templates(), id)) return *t;
  throw TemplateError("unknown template '" + std::string(id) + "'");
}

const Template* find_template(const std::vector<Template>& set, std::string_view id) {
  const std::string key = normalize_template_id(id);
  for (const auto& t : set)
    if (normalize_template_id(t.id) == key) return &t;
  return nullptr;
}

std::vector<Category> pos_signature(const Template& t) {
  std::vector<Category> sig;
  sig.reserve(t.slots.size());
  for (const auto& s : t.slots) sig.push_back(s.category);
  return sig;
}

nlohmann::json to_json(const Template& t) {
  nlohmann::json slots = nlohmann::json::array();
  for (const auto& s : t.slots) {
    slots.push_back({{"index", s.index},
                     {"category", to_string(s.category)},
                     {"role", to_string(s.role)},
                     {"number_policy", to_string(s.number_policy)},
                     {"fixed_form", s.fixed_form ? nlohmann::json(*s.fixed_form) : nlohmann::json()},
                     {"agrees_with", s.agrees_with ? nlohmann::json(*s.agrees_with) : nlohmann::json()}});
  }
  return {{"id", t.id}, {"description", t.description}, {"slots", std::move(slots)}};
}

Template template_from_json(const nlohmann::json& j) {
  try {
    Template t;
    t.id = j.at("id").get<std::string>();
    t.description = j.value("description", "");
    const auto& slots = j.at("slots");
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& js = slots[i];
      Slot s;
      s.index = js.contains("index") ? js["index"].get<std::size_t>() : i;
      s.category = parse_category(js.at("category").get<std::string>());
      s.role = parse_role(js.value("role", "Other"));
      s.number_policy = parse_policy(
          js.value("number_policy", carries_number(s.category) ? "Free" : "NotApplicable"));
      if (js.contains("fixed_form") && !js["fixed_form"].is_null())
        s.fixed_form = fold_case(js["fixed_form"].get<std::string>());
      if (js.contains("agrees_with") && !js["agrees_with"].is_null())
        s.agrees_with = js["agrees_with"].get<std::size_t>();
      t.slots.push_back(std::move(s));
    }
    validate(t);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string("malformed template JSON: ") + e.what());
  }
}

std::vector<Template> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw TemplateError(path.string() + ": " + e.what());
  }
  std::vector<Template> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(template_from_json(item));
  } else {
    out.push_back(template_from_json(j));
  }
  return out;
}

std::vector<Template> merge_templates(std::vector<Template> extra) {
  std::vector<Template> all = builtin_templates();
  for (auto& t : extra) {
    if (find_template(all, t.id)) throw TemplateError("duplicate template id '" + t.id + "'");
    all.push_back(std::move(t));
  }
  return all;
}

}  // namespace sva
