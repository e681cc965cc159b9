// narrative-net command line: one subcommand per pipeline step, plus `serve` and `run`.
//
// Exit codes: 0 ok, 1 usage or configuration error, 2 data or I/O error, 3 internal error.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "narrative_net.hpp"

namespace nn = narrative_net;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

std::vector<nn::CorpusItem> load_corpus(const std::string& path) { return nn::corpus_from_jsonl(nn::read_file(path), path); }

std::vector<nn::ResolvedSpeaker> load_resolved(const std::string& path) {
  return nn::resolved_from_jsonl(nn::read_file(path), path);
}

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(nn::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw nn::ConfigError(path + ": " + e.what());
  }
}

std::string joined(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw nn::IoError(dir, ec.message());
}

int exit_code(nn::ErrorKind k) {
  switch (k) {
    case nn::ErrorKind::usage:
    case nn::ErrorKind::config: return 1;
    case nn::ErrorKind::data:
    case nn::ErrorKind::io: return 2;
    case nn::ErrorKind::internal: return 3;
  }
  return 3;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character networks from narrative text"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Pipeline config (JSON)");
  app.add_option("--seed", g.seed, "Seed for randomized references");
  app.add_option("--out-dir", g.out_dir, "Output directory");

  // extract
  struct {
    std::string in, rules, out, quotes = "curly", chapter = R"(^CHAPTER\b)";
  } ex;
  auto* extract = app.add_subcommand("extract", "Clean text and extract the dialogue corpus");
  extract->add_option("--in", ex.in, "Raw UTF-8 text")->required()->check(CLI::ExistingFile);
  extract->add_option("--rules", ex.rules, "Cleaning rules (JSON array); built-in rules when omitted")
      ->check(CLI::ExistingFile);
  extract->add_option("--out", ex.out, "Corpus JSON Lines");
  extract->add_option("--quote-style", ex.quotes, "curly, straight or both");
  extract->add_option("--chapter-regex", ex.chapter, "Chapter heading pattern (case-insensitive)");

  // attribute
  struct {
    std::string corpus, registry, adapter, adapter_cmd, out, review;
    double review_threshold = 0.6;
    int timeout = 30;
  } at;
  auto* attribute = app.add_subcommand("attribute", "Label speakers heuristically or through an external model");
  attribute->add_option("--corpus", at.corpus)->required()->check(CLI::ExistingFile);
  attribute->add_option("--registry", at.registry)->required()->check(CLI::ExistingFile);
  auto* adapter_opt = attribute->add_option("--adapter", at.adapter, "Attributor base URL");
  attribute->add_option("--adapter-cmd", at.adapter_cmd, "Attributor command speaking JSON lines on stdio")
      ->excludes(adapter_opt);
  attribute->add_option("--timeout", at.timeout, "Adapter timeout in seconds");
  attribute->add_option("--out", at.out, "Label log (appended)")->required();
  attribute->add_option("--review", at.review, "Write labels below the review threshold here");
  attribute->add_option("--review-threshold", at.review_threshold);

  // augment
  struct {
    std::string corpus, labels, squad_out;
  } au;
  auto* augment = app.add_subcommand("augment", "Expand labels into a SQuAD training set");
  augment->add_option("--corpus", au.corpus)->required()->check(CLI::ExistingFile);
  augment->add_option("--labels", au.labels)->required()->check(CLI::ExistingFile);
  augment->add_option("--squad-out", au.squad_out)->required();

  // resolve
  struct {
    std::string corpus, labels, registry, out;
  } rs;
  auto* resolve = app.add_subcommand("resolve", "Map labeled surfaces to canonical characters");
  resolve->add_option("--corpus", rs.corpus)->required()->check(CLI::ExistingFile);
  resolve->add_option("--labels", rs.labels)->required()->check(CLI::ExistingFile);
  resolve->add_option("--registry", rs.registry)->required()->check(CLI::ExistingFile);
  resolve->add_option("--out", rs.out, "Resolved speakers JSON Lines");

  // graph
  struct {
    std::string resolved, registry, stages, corpus;
    std::optional<std::size_t> stage_count;
    std::size_t min_degree = 0;
  } gr;
  auto* graph = app.add_subcommand("graph", "Build the interaction graph and optional stage slices");
  graph->add_option("--resolved", gr.resolved)->required()->check(CLI::ExistingFile);
  graph->add_option("--registry", gr.registry)->required()->check(CLI::ExistingFile);
  auto* stages_opt = graph->add_option("--stages", gr.stages, "Stage plan (JSON)")->check(CLI::ExistingFile);
  graph->add_option("--corpus", gr.corpus, "Corpus; needed to locate stage markers")
      ->check(CLI::ExistingFile)
      ->needs(stages_opt);
  graph->add_option("--stage-count", gr.stage_count);
  graph->add_option("--min-degree", gr.min_degree, "Also write full.filtered.* keeping nodes of higher degree");

  // metrics
  struct {
    std::string graph, out, nodes_csv, rich_csv;
    std::size_t samples = 10;
  } mt;
  auto* metrics = app.add_subcommand("metrics", "Compute the metric report of one graph");
  metrics->add_option("--graph", mt.graph, "GEXF or edge-list CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--swi-samples", mt.samples, "Random references averaged for the small-world index");
  metrics->add_option("--out", mt.out, "Report JSON");
  metrics->add_option("--centralities-csv", mt.nodes_csv);
  metrics->add_option("--rich-club-csv", mt.rich_csv);

  // sentiment
  struct {
    std::string corpus, resolved, registry, lexicon, out, words_csv, tagger_url;
    std::vector<std::string> targets;
    std::size_t top = 50;
    bool types = false, first_sense = false;
  } se;
  auto* sentiment = app.add_subcommand("sentiment", "Score how other characters describe a target");
  sentiment->add_option("--corpus", se.corpus)->required()->check(CLI::ExistingFile);
  sentiment->add_option("--resolved", se.resolved)->required()->check(CLI::ExistingFile);
  sentiment->add_option("--registry", se.registry)->required()->check(CLI::ExistingFile);
  sentiment->add_option("--target", se.targets, "Character id or canonical name")->required();
  sentiment->add_option("--lexicon", se.lexicon, "SentiWordNet-format lexicon")->required()->check(CLI::ExistingFile);
  sentiment->add_option("--out", se.out);
  sentiment->add_option("--words-csv", se.words_csv, "Word frequency table of the first target");
  sentiment->add_option("--top", se.top);
  sentiment->add_option("--tagger-url", se.tagger_url, "External POS tagger instead of the built-in word list");
  sentiment->add_flag("--types", se.types, "Count each distinct word once");
  sentiment->add_flag("--first-sense", se.first_sense, "Use the first lexicon sense instead of the mean");

  // serve
  struct {
    std::string corpus, registry, log, host = "127.0.0.1", ui_dir;
    int port = 8080;
  } sv;
  auto* serve = app.add_subcommand("serve", "Serve the labeling API and UI");
  serve->add_option("--corpus", sv.corpus)->required()->check(CLI::ExistingFile);
  serve->add_option("--registry", sv.registry)->required()->check(CLI::ExistingFile);
  serve->add_option("--log", sv.log, "Label log")->required();
  serve->add_option("--host", sv.host);
  serve->add_option("--port", sv.port);
  serve->add_option("--ui-dir", sv.ui_dir, "Static UI assets");

  auto* run = app.add_subcommand("run", "Run the whole pipeline from --config into --out-dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*extract) {
      nn::RawText raw{nn::read_file(ex.in), fs::path(ex.in).stem().string()};
      nn::validate(raw);
      const auto rules = ex.rules.empty() ? nn::default_cleaning_rules() : nn::parse_cleaning_rules(nn::read_file(ex.rules));
      nn::ExtractOptions opts;
      opts.quote_style = nn::parse_quote_style(ex.quotes);
      opts.chapter_pattern = ex.chapter;
      const auto corpus = nn::extract_corpus(nn::clean_text(raw, rules), opts);
      std::size_t unbalanced = 0;
      for (const auto& item : corpus) unbalanced += item.unbalanced;
      if (unbalanced) std::cerr << "warning: " << unbalanced << " unbalanced quote(s) truncated at paragraph end\n";
      const auto out = ex.out.empty() ? joined(g.out_dir, "corpus.jsonl") : ex.out;
      ensure_dir(fs::path(out).parent_path().string());
      nn::write_file(out, nn::corpus_to_jsonl(corpus));
      std::cout << corpus.size() << " items -> " << out << "\n";
    } else if (*attribute) {
      const auto corpus = load_corpus(at.corpus);
      const auto registry = nn::load_registry(at.registry);
      nn::LabelStore store(at.out, corpus);
      const auto decided = store.current();
      std::vector<nn::CorpusItem> todo;
      for (const auto& item : corpus)
        if (!decided.count(item.id)) todo.push_back(item);
      std::vector<nn::SpeakerLabel> labels;
      std::size_t warnings = 0;
      if (!at.adapter.empty() || !at.adapter_cmd.empty()) {
        std::unique_ptr<nn::Attributor> adapter;
        if (!at.adapter.empty())
          adapter = std::make_unique<nn::HttpAttributor>(at.adapter, std::chrono::seconds(at.timeout));
        else
          adapter = std::make_unique<nn::ProcessAttributor>(at.adapter_cmd, std::chrono::seconds(at.timeout));
        auto result = nn::external_attribute(todo, *adapter);
        warnings = result.warnings;
        for (auto& l : result.labels)
          if (l) labels.push_back(std::move(*l));
      } else {
        for (const auto& item : todo)
          if (auto l = nn::heuristic_attribute(item, registry)) labels.push_back(std::move(*l));
      }
      store.put_batch(labels);
      if (warnings) std::cerr << "warning: " << warnings << " prediction(s) rejected\n";
      if (!at.review.empty()) {
        std::vector<nn::LabelEntry> review;
        for (const auto& l : nn::low_confidence(labels, at.review_threshold)) review.push_back({l.item_id, l});
        nn::write_file(at.review, nn::labels_to_jsonl(review));
      }
      std::cout << labels.size() << " of " << todo.size() << " unlabeled items labeled -> " << at.out << "\n";
    } else if (*augment) {
      const auto corpus = load_corpus(au.corpus);
      const auto labels = nn::current_labels(nn::replay_label_log(nn::read_file(au.labels), au.labels).entries);
      const auto count = nn::export_squad_file(au.squad_out, corpus, labels);
      std::cout << count.speakers << " speakers x " << count.contexts << " contexts = " << count.records
                << " records -> " << au.squad_out << "\n";
    } else if (*resolve) {
      const auto corpus = load_corpus(rs.corpus);
      const auto registry = nn::load_registry(rs.registry);
      int max_chapter = 1;
      for (const auto& item : corpus) max_chapter = std::max(max_chapter, item.chapter);
      for (const auto& w : nn::validate_registry(registry, max_chapter)) std::cerr << "warning: " << w << "\n";
      const auto log = nn::replay_label_log(nn::read_file(rs.labels), rs.labels).entries;
      const auto outcome = nn::resolve_labels(corpus, log, registry);
      const auto out = rs.out.empty() ? joined(g.out_dir, "resolved.jsonl") : rs.out;
      nn::write_file(out, nn::resolved_to_jsonl(outcome.resolved));
      if (outcome.unresolved) std::cerr << "warning: " << outcome.unresolved << " surface(s) unresolved\n";
      std::cout << outcome.resolved.size() << " resolved -> " << out << "\n";
    } else if (*graph) {
      const auto resolved = load_resolved(gr.resolved);
      const auto registry = nn::load_registry(gr.registry);
      const std::string dir = g.out_dir.empty() ? "." : g.out_dir;
      ensure_dir(dir);
      auto full = nn::build_graph(resolved, registry);
      full.source = fs::path(gr.resolved).stem().string();
      nn::write_file(joined(dir, "full.gexf"), nn::to_gexf(full));
      nn::write_file(joined(dir, "full.csv"), nn::to_edge_csv(full));
      if (gr.min_degree > 0) {
        const auto filtered = nn::filter_by_degree(full, gr.min_degree);
        nn::write_file(joined(dir, "full.filtered.gexf"), nn::to_gexf(filtered));
        nn::write_file(joined(dir, "full.filtered.csv"), nn::to_edge_csv(filtered));
      }
      nlohmann::ordered_json stats;
      stats["full"] = nn::to_ordered_json(nn::stage_stats(full));
      if (!gr.stages.empty()) {
        if (gr.corpus.empty()) throw nn::ConfigError("--stages needs --corpus to locate the markers");
        auto plan = nn::stage_plan_from_json(load_json(gr.stages));
        if (gr.stage_count) plan.stage_count = *gr.stage_count;
        const auto corpus = load_corpus(gr.corpus);
        std::vector<nn::StageStats> ss;
        for (auto& s : nn::build_stages(resolved, corpus, plan, registry)) {
          s.source = full.source;
          const auto name = "stage_" + std::to_string(*s.stage);
          nn::write_file(joined(dir, name + ".gexf"), nn::to_gexf(s));
          nn::write_file(joined(dir, name + ".csv"), nn::to_edge_csv(s));
          ss.push_back(nn::stage_stats(s));
        }
        stats["stages"] = nlohmann::ordered_json::array();
        for (const auto& s : ss) stats["stages"].push_back(nn::to_ordered_json(s));
        stats["average_node_growth_percent"] = nn::detail::opt_json(nn::average_node_growth(ss));
      }
      nn::write_file(joined(dir, "stats.json"), stats.dump(2) + "\n");
      std::cout << full.node_count() << " nodes, " << full.edge_count() << " edges -> " << dir << "\n";
    } else if (*metrics) {
      if (mt.samples > 0 && !g.seed) throw nn::ConfigError("--seed is required when --swi-samples > 0");
      const auto gph = nn::load_graph(mt.graph);
      const auto report = nn::compute_report(gph, mt.samples, g.seed.value_or(0));
      const auto out = mt.out.empty() ? joined(g.out_dir, "report.json") : mt.out;
      nn::write_file(out, nn::to_ordered_json(report).dump(2) + "\n");
      const auto base = fs::path(out).replace_extension("").string();
      nn::write_file(mt.nodes_csv.empty() ? base + ".centralities.csv" : mt.nodes_csv, nn::centralities_csv(report.nodes));
      nn::write_file(mt.rich_csv.empty() ? base + ".rich_club.csv" : mt.rich_csv, nn::rich_club_csv(report.rich_club));
      std::cout << "report -> " << out << "\n";
    } else if (*sentiment) {
      const auto corpus = load_corpus(se.corpus);
      const auto resolved = load_resolved(se.resolved);
      const auto registry = nn::load_registry(se.registry);
      const auto lexicon = nn::SentimentLexicon::load(se.lexicon);
      std::unique_ptr<nn::PosTagger> tagger;
      if (se.tagger_url.empty())
        tagger = std::make_unique<nn::LexiconTagger>();
      else
        tagger = std::make_unique<nn::HttpTagger>(se.tagger_url);
      auto results = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < se.targets.size(); ++i) {
        const auto words = nn::collect_evaluative(corpus, resolved, se.targets[i], registry, *tagger);
        const auto s = nn::score(words, lexicon, se.types ? nn::ScoreUnit::types : nn::ScoreUnit::instances,
                                 se.first_sense ? nn::SenseAggregation::first_sense : nn::SenseAggregation::mean);
        results.push_back(nn::to_ordered_json(s));
        if (i == 0 && !se.words_csv.empty()) nn::write_file(se.words_csv, nn::word_frequency_csv(nn::rank_words(words, se.top)));
      }
      const auto text = (results.size() == 1 ? results[0] : results).dump(2) + "\n";
      if (se.out.empty())
        std::cout << text;
      else
        nn::write_file(se.out, text);
    } else if (*serve) {
      nn::AnnotationSession session(load_corpus(sv.corpus), nn::load_registry(sv.registry), sv.log);
      httplib::Server server;
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const auto p = session.progress();
      std::cerr << "serving " << p.total << " items (" << p.labeled << " labeled, " << p.skipped
                << " skipped) on http://" << sv.host << ":" << sv.port << "\n";
      nn::serve_annotation(server, session, sv.host, sv.port, sv.ui_dir);
    } else if (*run) {
      if (g.config.empty()) throw nn::ConfigError("run needs --config");
      auto config = nn::PipelineConfig::load(g.config);
      if (g.seed) config.seed = g.seed;
      const auto result = nn::run_pipeline(config, g.out_dir.empty() ? "out" : g.out_dir);
      for (const auto& a : result.artifacts) std::cout << a.sha256 << "  " << a.name << "\n";
    }
  } catch (const nn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
