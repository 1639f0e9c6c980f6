#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "json_config.hpp"
#include "sva/corpus.hpp"
#include "sva/eval.hpp"
#include "sva/external_scorer.hpp"
#include "sva/generator.hpp"
#include "sva/lexicon.hpp"
#include "sva/template.hpp"
#include "sva/util.hpp"

namespace sva::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  std::string lexicon;
  std::string out_dir = "sva-out";
  std::string scorer = "oracle";
  unsigned jobs = 1;
  std::string format = "csv";
  std::string templates_file;
  bool keep_be = false;
  bool filter_vocab = false;
  bool filter_nouns = false;
  std::size_t batch_size = 64;
};

struct GenerateArgs {
  std::vector<std::string> templates;
  std::size_t n = 10000;
  bool unique = false;
  bool no_period = false;
  bool allow_clash = false;
};

struct MatchArgs {
  std::string corpus;
  std::vector<std::string> templates;
  std::optional<std::size_t> cap;
  std::vector<std::string> cap_for;
  std::optional<std::size_t> n;
  bool balance = false;
  bool truncate = false;
};

struct ImportArgs {
  std::string input;
};

struct EvalArgs {
  std::vector<std::string> data;
};

struct Exp2Args {
  std::string data;
  std::string nonce;
  std::string template_id;
  std::size_t repetitions = 10;
};

struct ReportArgs {
  std::string input;
};

/// Run state: where outputs go and what was written.
class Run {
 public:
  Run(const Globals& g, std::string subcommand) : g_(g), sub_(std::move(subcommand)) {
    fs::create_directories(g_.out_dir);
  }

  fs::path write(const std::string& prefix, const std::string& ext, const std::string& content) {
    return write_named(prefix + "_" + hex64(fnv1a64(content)).substr(0, 12) + ext, content);
  }

  fs::path write_named(const std::string& name, const std::string& content) {
    const fs::path p = fs::path(g_.out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    f << content;
    artifacts_.push_back(p.string());
    return p;
  }

  fs::path write_dataset(const std::string& prefix, const Dataset& d, const std::string& lexicon_hash) {
    const std::string body = to_jsonl(d);
    const fs::path p = write(prefix, ".jsonl", body);
    DatasetHeader h{d.template_id, d.source, d.generation_seed, lexicon_hash, generator_version(),
                    d.items.size()};
    std::ofstream meta(sidecar_path(p), std::ios::binary);
    meta << to_json(h).dump(2) << '\n';
    return p;
  }

  void finish(const json& resolved) {
    // Named per subcommand so a later step in the same directory keeps earlier capsules.
    std::ofstream cfg(fs::path(g_.out_dir) / ("resolved_config." + sub_ + ".json"), std::ios::binary);
    cfg << resolved.dump(2) << '\n';
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json meta{{"subcommand", sub_},
              {"unix_time_ms", std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
              {"artifacts", artifacts_}};
    std::ofstream m(fs::path(g_.out_dir) / ("run_meta." + sub_ + ".json"), std::ios::binary);
    m << meta.dump(2) << '\n';
  }

  const std::vector<std::string>& artifacts() const { return artifacts_; }

 private:
  const Globals& g_;
  std::string sub_;
  std::vector<std::string> artifacts_;
};

json globals_json(const Globals& g) {
  return {{"seed", g.seed},
          {"lexicon", g.lexicon.empty() ? default_lexicon_manifest().string() : g.lexicon},
          {"out", g.out_dir},
          {"scorer", g.scorer},
          {"jobs", g.jobs},
          {"format", g.format},
          {"templates_file", g.templates_file},
          {"keep_be", g.keep_be},
          {"filter_vocab", g.filter_vocab},
          {"filter_nouns", g.filter_nouns},
          {"batch_size", g.batch_size}};
}

Lexicon load_lex(const Globals& g) {
  LexiconOptions o;
  o.exclude_be = !g.keep_be;
  return load_lexicon(g.lexicon.empty() ? default_lexicon_manifest() : fs::path(g.lexicon), o);
}

std::vector<Template> all_templates(const Globals& g) {
  if (g.templates_file.empty()) return builtin_templates();
  return merge_templates(load_templates(g.templates_file));
}

std::vector<Template> pick_templates(const std::vector<Template>& all, const std::vector<std::string>& ids) {
  if (ids.empty() || std::find(ids.begin(), ids.end(), "all") != ids.end()) return all;
  std::vector<Template> out;
  for (const auto& id : ids) {
    const Template* t = find_template(all, id);
    if (!t) throw TemplateError("unknown template '" + id + "'");
    out.push_back(*t);
  }
  return out;
}

std::unique_ptr<Scorer> open_scorer(const Globals& g, Lexicon& lex) {
  auto scorer = make_scorer(g.scorer, &lex);
  if (g.filter_vocab) {
    std::vector<std::string> words;
    for (const auto& p : lex.verbs) words.insert(words.end(), {p.third_singular, p.plural_base});
    for (const auto& p : lex.stative_verbs) words.insert(words.end(), {p.third_singular, p.plural_base});
    if (g.filter_nouns)
      for (const auto& p : lex.nouns) words.insert(words.end(), {p.singular, p.plural});
    const auto known = scorer->contains(words);
    if (known) {
      std::unordered_set<std::string> vocab;
      for (std::size_t i = 0; i < words.size(); ++i)
        if ((*known)[i]) vocab.insert(words[i]);
      lex = filter_by_scorer_vocab(lex, vocab, g.filter_nouns);
    }
  }
  return scorer;
}

void emit_report(std::ostream& out, const EvalReport& r, const std::string& format) {
  if (format == "json") {
    json j = to_json(r);
    for (auto& row : j["rows"]) row.erase("items");
    out << j.dump(2) << '\n';
  } else if (format == "tsv") {
    write_tsv(out, r);
  } else {
    write_csv(out, r);
  }
}

void save_report(Run& run, const std::string& prefix, const EvalReport& r, const std::string& format) {
  std::ostringstream csv, summary, outcomes, tsv;
  write_csv(csv, r);
  emit_report(summary, r, "json");
  write_outcomes(outcomes, r);
  // One hash over the whole bundle so the files of a run share a stem.
  const std::string hash = hex64(fnv1a64(csv.str() + summary.str() + outcomes.str())).substr(0, 12);
  const std::string stem = prefix + "_" + hash;
  run.write_named(stem + ".csv", csv.str());
  run.write_named(stem + ".summary.json", summary.str());
  run.write_named(stem + ".outcomes.jsonl", outcomes.str());
  if (format == "tsv") {
    write_tsv(tsv, r);
    run.write_named(stem + ".tsv", tsv.str());
  }
}

int cmd_generate(const Globals& g, const GenerateArgs& a, std::ostream& out, json& resolved) {
  const Lexicon lex = load_lex(g);
  const auto templates = pick_templates(all_templates(g), a.templates);
  Run run(g, "generate");
  GenerateOptions o;
  o.jobs = g.jobs;
  o.unique = a.unique;
  o.terminal_period = !a.no_period;
  o.avoid_cue_target_clash = !a.allow_clash;
  const std::string lh = lexicon_fingerprint(lex);
  for (const auto& t : templates) {
    const Dataset d = generate(t, lex, a.n, g.seed, o);
    run.write_dataset("nonce_" + t.id, d, lh);
  }
  resolved["options"] = {{"template", a.templates}, {"n", a.n}, {"unique", a.unique},
                         {"no_period", a.no_period}, {"allow_clash", a.allow_clash}};
  resolved["lexicon_fingerprint"] = lh;
  run.finish(resolved);
  out << json{{"artifacts", run.artifacts()}}.dump(2) << '\n';
  return 0;
}

int cmd_match(const Globals& g, const MatchArgs& a, std::ostream& out, json& resolved) {
  const Lexicon lex = load_lex(g);
  const auto templates = pick_templates(all_templates(g), a.templates);
  const DictionaryIndex idx(lex);
  ScanLimits limits;
  limits.default_cap = a.cap;
  for (const auto& spec : a.cap_for) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--cap-for", "expected TEMPLATE=N, got " + spec);
    limits.per_template[spec.substr(0, eq)] = std::stoul(spec.substr(eq + 1));
  }
  const auto docs = read_corpus_dir(a.corpus);
  const auto records = scan(docs, templates, idx, limits, g.jobs);

  Run run(g, "match");
  const std::string lh = lexicon_fingerprint(lex);
  HarvestOptions ho;
  ho.balance = a.balance;
  ho.truncate = a.truncate;
  json counts = json::object();
  for (const auto& t : templates) {
    std::size_t available = 0;
    for (const auto& r : records) available += r.stimulus.template_id == t.id;
    HarvestOptions opts = ho;
    std::size_t n = available;
    if (a.n) {
      n = *a.n;
    } else {
      opts.truncate = true;
      if (opts.balance) n -= n % 2;
    }
    const auto chosen = select_records(records, t.id, n, opts);
    Dataset d;
    d.template_id = t.id;
    d.source = Source::WIKI;
    for (const auto& r : chosen) d.items.push_back(r.stimulus);
    const fs::path p = run.write_dataset("wiki_" + t.id, d, lh);
    std::ostringstream prov;
    write_provenance(prov, chosen);
    run.write_named(fs::path(p).replace_extension(".provenance.jsonl").filename().string(), prov.str());
    counts[t.id] = {{"matched", available}, {"kept", d.items.size()}};
  }
  resolved["options"] = {{"corpus", a.corpus}, {"template", a.templates}, {"cap", a.cap ? json(*a.cap) : json()},
                         {"cap_for", a.cap_for}, {"n", a.n ? json(*a.n) : json()},
                         {"balance", a.balance}, {"truncate", a.truncate}};
  resolved["lexicon_fingerprint"] = lh;
  run.finish(resolved);
  out << json{{"artifacts", run.artifacts()}, {"counts", counts}}.dump(2) << '\n';
  return 0;
}

int cmd_import(const Globals& g, const ImportArgs& a, std::ostream& out, json& resolved) {
  const Lexicon lex = load_lex(g);
  const auto sets = import_ml(fs::path(a.input), all_templates(g), &lex);
  Run run(g, "import-ml");
  for (const auto& [id, d] : sets) run.write_dataset("ml_" + id, d, lexicon_fingerprint(lex));
  resolved["options"] = {{"input", a.input}};
  run.finish(resolved);
  out << json{{"artifacts", run.artifacts()}}.dump(2) << '\n';
  return 0;
}

EvalOptions eval_options(const Globals& g) {
  EvalOptions o;
  o.jobs = g.jobs;
  o.batch_size = g.batch_size;
  return o;
}

int cmd_evaluate(const Globals& g, const EvalArgs& a, std::ostream& out, json& resolved) {
  Lexicon lex = load_lex(g);
  auto scorer = open_scorer(g, lex);
  EvalReport report;
  for (const auto& path : a.data) report.append(evaluate(load_dataset(path), *scorer, eval_options(g)));
  Run run(g, "evaluate");
  save_report(run, "evaluate", report, g.format);
  resolved["options"] = {{"data", a.data}};
  run.finish(resolved);
  emit_report(out, report, g.format);
  return 0;
}

int cmd_exp1(const Globals& g, const EvalArgs& a, std::ostream& out, json& resolved) {
  Lexicon lex = load_lex(g);
  auto scorer = open_scorer(g, lex);
  Exp1Inputs inputs;
  for (const auto& path : a.data) {
    Dataset d = load_dataset(path);
    auto& slot = inputs[d.template_id];
    if (slot.count(d.source))
      throw DataError("two " + std::string(to_string(d.source)) + " datasets for template " + d.template_id);
    slot.emplace(d.source, std::move(d));
  }
  const EvalReport report = run_exp1(inputs, *scorer, eval_options(g));
  Run run(g, "exp1");
  save_report(run, "exp1", report, g.format);
  resolved["options"] = {{"data", a.data}};
  run.finish(resolved);
  emit_report(out, report, g.format);
  return 0;
}

int cmd_exp2(const Globals& g, const Exp2Args& a, std::ostream& out, json& resolved) {
  Lexicon lex = load_lex(g);
  auto scorer = open_scorer(g, lex);
  const Dataset wiki = load_dataset(a.data);
  const auto templates = all_templates(g);
  const std::string tid = a.template_id.empty() ? wiki.template_id : a.template_id;
  const Template* t = find_template(templates, tid);
  if (!t) throw TemplateError("unknown template '" + tid + "'");
  std::optional<Dataset> nonce;
  if (!a.nonce.empty()) nonce = load_dataset(a.nonce);
  Exp2Options o;
  o.repetitions = a.repetitions;
  o.seed = g.seed;
  o.eval = eval_options(g);
  const EvalReport report = run_exp2(wiki, *t, lex, *scorer, o, nonce ? &*nonce : nullptr);
  Run run(g, "exp2");
  save_report(run, "exp2_" + t->id, report, g.format);
  resolved["options"] = {{"data", a.data}, {"nonce", a.nonce}, {"template", tid},
                         {"repetitions", a.repetitions}};
  run.finish(resolved);
  emit_report(out, report, g.format);
  return 0;
}

int cmd_report(const Globals& g, const ReportArgs& a, std::ostream& out, json& resolved) {
  std::ifstream in(a.input);
  if (!in) throw DataError("cannot open " + a.input);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(a.input + ": " + e.what());
  }
  const EvalReport report = report_from_json(j);
  Run run(g, "report");
  resolved["options"] = {{"input", a.input}};
  run.finish(resolved);
  emit_report(out, report, g.format);
  return 0;
}

void error_json(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subject-verb agreement stimulus generation, corpus mining and evaluation", "sva"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("sva ") + generator_version());

  Globals g;
  app.add_option("--seed", g.seed, "Global random seed")->capture_default_str();
  app.add_option("--lexicon", g.lexicon, "Lexicon manifest (JSON)");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--scorer", g.scorer,
                 "oracle | uniform | coinflip[:SEED] | linear-proximity | stdio:CMD | http://HOST:PORT")
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--format", g.format, "Report encoding")->check(CLI::IsMember({"csv", "json", "tsv"}))
      ->capture_default_str();
  app.add_option("--templates-file", g.templates_file, "Extra templates (JSON)");
  app.add_flag("--keep-be", g.keep_be, "Keep is/are/am verb pairs");
  app.add_flag("--filter-vocab", g.filter_vocab, "Drop verb pairs outside the scorer vocabulary");
  app.add_flag("--filter-nouns", g.filter_nouns, "With --filter-vocab, filter noun pairs too");
  app.add_option("--batch-size", g.batch_size, "Requests per scorer call")->check(CLI::PositiveNumber);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Generate balanced NONCE datasets");
  gen->add_option("--template", ga.templates, "Template ids (default: all)");
  gen->add_option("--n", ga.n, "Items per template (even)")->capture_default_str();
  gen->add_flag("--unique", ga.unique, "Forbid duplicate sentences");
  gen->add_flag("--no-period", ga.no_period, "Omit the final period token");
  gen->add_flag("--allow-clash", ga.allow_clash, "Allow the target form to equal the cue form");

  MatchArgs ma;
  auto* match = app.add_subcommand("match", "Harvest template matches from a plain-text corpus");
  match->add_option("--corpus", ma.corpus, "Corpus file or directory")->required();
  match->add_option("--template", ma.templates, "Template ids (default: all)");
  match->add_option("--cap", ma.cap, "Matches kept per template during the scan");
  match->add_option("--cap-for", ma.cap_for, "Per-template cap, TEMPLATE=N");
  match->add_option("--n", ma.n, "Items harvested per template (default: all matches)");
  match->add_flag("--balance", ma.balance, "Harvest n/2 singular and n/2 plural cues");
  match->add_flag("--truncate", ma.truncate, "Accept fewer than n matches");

  ImportArgs ia;
  auto* imp = app.add_subcommand("import-ml", "Import minimal pairs (TEMPLATE<tab>GOOD<tab>BAD)");
  imp->add_option("--input", ia.input, "Minimal-pair file")->required()->check(CLI::ExistingFile);

  EvalArgs ea;
  auto* ev = app.add_subcommand("evaluate", "Score datasets with a scorer");
  ev->add_option("--data", ea.data, "Dataset JSONL files")->required()->check(CLI::ExistingFile);

  EvalArgs e1;
  auto* exp1 = app.add_subcommand("exp1", "Accuracy per template and source (ML, WIKI, NONCE)");
  exp1->add_option("--data", e1.data, "Dataset JSONL files")->required()->check(CLI::ExistingFile);

  Exp2Args e2;
  auto* exp2 = app.add_subcommand("exp2", "One-word replacement sweep over a WIKI dataset");
  exp2->add_option("--data", e2.data, "WIKI dataset JSONL")->required()->check(CLI::ExistingFile);
  exp2->add_option("--nonce", e2.nonce, "NONCE dataset for the reference row")->check(CLI::ExistingFile);
  exp2->add_option("--template", e2.template_id, "Template id (default: from the dataset)");
  exp2->add_option("--repetitions", e2.repetitions, "Draws per position")
      ->check(CLI::PositiveNumber)->capture_default_str();

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "Re-encode a JSON report summary");
  rep->add_option("--input", ra.input, "Report summary JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    error_json(err, "usage", e.what());
    return 2;
  }

  json resolved{{"global", globals_json(g)}, {"version", generator_version()}};
  try {
    if (app.got_subcommand(gen)) {
      resolved["subcommand"] = "generate";
      return cmd_generate(g, ga, out, resolved);
    }
    if (app.got_subcommand(match)) {
      resolved["subcommand"] = "match";
      return cmd_match(g, ma, out, resolved);
    }
    if (app.got_subcommand(imp)) {
      resolved["subcommand"] = "import-ml";
      return cmd_import(g, ia, out, resolved);
    }
    if (app.got_subcommand(ev)) {
      resolved["subcommand"] = "evaluate";
      return cmd_evaluate(g, ea, out, resolved);
    }
    if (app.got_subcommand(exp1)) {
      resolved["subcommand"] = "exp1";
      return cmd_exp1(g, e1, out, resolved);
    }
    if (app.got_subcommand(exp2)) {
      resolved["subcommand"] = "exp2";
      return cmd_exp2(g, e2, out, resolved);
    }
    if (app.got_subcommand(rep)) {
      resolved["subcommand"] = "report";
      return cmd_report(g, ra, out, resolved);
    }
  } catch (const CLI::ParseError& e) {
    error_json(err, "usage", e.what());
    return 2;
  } catch (const LexiconError& e) {
    error_json(err, "lexicon", e.what());
  } catch (const TemplateError& e) {
    error_json(err, "template", e.what());
  } catch (const GeneratorError& e) {
    error_json(err, "generator", e.what());
  } catch (const CorpusError& e) {
    error_json(err, "corpus", e.what());
  } catch (const ScorerHandshakeError& e) {
    error_json(err, "scorer_handshake", e.what());
  } catch (const DataError& e) {
    error_json(err, "data", e.what());
  } catch (const EvalError& e) {
    error_json(err, "eval", e.what());
  } catch (const std::invalid_argument& e) {
    error_json(err, "usage", e.what());
    return 2;
  } catch (const std::exception& e) {
    error_json(err, "internal", e.what());
  }
  return 1;
}

}  // namespace sva::cli
