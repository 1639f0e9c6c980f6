#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "sva/eval.hpp"

namespace sva {
namespace {

nlohmann::json opt_index(const std::optional<std::size_t>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

std::optional<std::size_t> read_index(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::size_t>();
}

nlohmann::json tally_json(const Tally& t) { return {{"n", t.n}, {"correct", t.correct}}; }
Tally tally_from(const nlohmann::json& j) {
  return {j.at("n").get<std::size_t>(), j.at("correct").get<std::size_t>()};
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string position_text(const std::optional<std::size_t>& p) {
  return p ? std::to_string(*p) : std::string();
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& o : row.items) {
      items.push_back({{"index", o.index},
                       {"skipped", o.skipped},
                       {"correct", o.correct},
                       {"scores", {o.scores[0], o.scores[1]}},
                       {"note", o.note}});
    }
    rows.push_back({{"template", row.template_id},
                    {"source", to_string(row.source)},
                    {"condition", row.condition},
                    {"position", opt_index(row.position)},
                    {"repetition", row.repetition},
                    {"n", row.n_items},
                    {"correct", row.n_correct},
                    {"skipped", row.skipped},
                    {"accuracy", row.accuracy},
                    {"absent", row.absent},
                    {"singular", tally_json(row.singular)},
                    {"plural", tally_json(row.plural)},
                    {"attractor_congruent", tally_json(row.attractor_congruent)},
                    {"attractor_incongruent", tally_json(row.attractor_incongruent)},
                    {"items", std::move(items)}});
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : r.aggregates) {
    aggs.push_back({{"template", a.template_id},
                    {"source", to_string(a.source)},
                    {"condition", a.condition},
                    {"position", opt_index(a.position)},
                    {"repetitions", a.repetitions},
                    {"mean", a.mean},
                    {"stddev", a.stddev},
                    {"incongruent_mean",
                     a.incongruent_mean ? nlohmann::json(*a.incongruent_mean) : nlohmann::json()}});
  }
  return {{"rows", std::move(rows)}, {"aggregates", std::move(aggs)}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    for (const auto& jr : j.at("rows")) {
      EvalRow row;
      row.template_id = jr.at("template").get<std::string>();
      row.source = parse_source(jr.at("source").get<std::string>());
      row.condition = jr.at("condition").get<std::string>();
      row.position = read_index(jr, "position");
      row.repetition = jr.at("repetition").get<std::size_t>();
      row.n_items = jr.at("n").get<std::size_t>();
      row.n_correct = jr.at("correct").get<std::size_t>();
      row.skipped = jr.at("skipped").get<std::size_t>();
      row.accuracy = jr.at("accuracy").get<double>();
      row.absent = jr.value("absent", false);
      row.singular = tally_from(jr.at("singular"));
      row.plural = tally_from(jr.at("plural"));
      row.attractor_congruent = tally_from(jr.at("attractor_congruent"));
      row.attractor_incongruent = tally_from(jr.at("attractor_incongruent"));
      for (const auto& ji : jr.value("items", nlohmann::json::array())) {
        ItemOutcome o;
        o.index = ji.at("index").get<std::size_t>();
        o.skipped = ji.at("skipped").get<bool>();
        o.correct = ji.at("correct").get<bool>();
        o.scores = {ji.at("scores")[0].get<double>(), ji.at("scores")[1].get<double>()};
        o.note = ji.value("note", "");
        row.items.push_back(std::move(o));
      }
      r.rows.push_back(std::move(row));
    }
    for (const auto& ja : j.at("aggregates")) {
      Aggregate a;
      a.template_id = ja.at("template").get<std::string>();
      a.source = parse_source(ja.at("source").get<std::string>());
      a.condition = ja.at("condition").get<std::string>();
      a.position = read_index(ja, "position");
      a.repetitions = ja.at("repetitions").get<std::size_t>();
      a.mean = ja.at("mean").get<double>();
      a.stddev = ja.at("stddev").get<double>();
      if (ja.contains("incongruent_mean") && !ja["incongruent_mean"].is_null())
        a.incongruent_mean = ja["incongruent_mean"].get<double>();
      r.aggregates.push_back(std::move(a));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw EvalError(std::string("malformed report JSON: ") + e.what());
  }
}

void write_csv(std::ostream& out, const EvalReport& r) {
  out << "template,source,condition,position,repetition,n,correct,skipped,accuracy\n";
  for (const auto& row : r.rows) {
    out << row.template_id << ',' << to_string(row.source) << ',' << row.condition << ','
        << position_text(row.position) << ',' << row.repetition << ',' << row.n_items << ','
        << row.n_correct << ',' << row.skipped << ',' << (row.absent ? "NA" : fixed(row.accuracy))
        << '\n';
  }
}

void write_tsv(std::ostream& out, const EvalReport& r) {
  out << "# template\tsource\tcondition\tposition\trepetitions\tmean\tstddev\n";
  for (const auto& a : r.aggregates) {
    out << a.template_id << '\t' << to_string(a.source) << '\t' << a.condition << '\t'
        << (a.position ? std::to_string(*a.position) : "-") << '\t' << a.repetitions << '\t'
        << fixed(a.mean) << '\t' << fixed(a.stddev) << '\n';
  }
}

void write_outcomes(std::ostream& out, const EvalReport& r) {
  for (const auto& row : r.rows) {
    for (const auto& o : row.items) {
      nlohmann::ordered_json j;
      j["template"] = row.template_id;
      j["source"] = to_string(row.source);
      j["condition"] = row.condition;
      j["position"] = opt_index(row.position);
      j["repetition"] = row.repetition;
      j["index"] = o.index;
      j["skipped"] = o.skipped;
      j["correct"] = o.correct;
      j["scores"] = {o.scores[0], o.scores[1]};
      if (!o.note.empty()) j["note"] = o.note;
      out << j.dump() << '\n';
    }
  }
}

}  // namespace sva
