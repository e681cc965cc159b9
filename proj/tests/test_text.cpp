#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "narrative_net/alias_resolution.hpp"
#include "narrative_net/sentiment.hpp"
#include "narrative_net/text_ingest.hpp"
#include "narrative_net/utf8.hpp"

namespace nn = narrative_net;

namespace {

nn::RawText raw(std::string s) { return {std::move(s), "t"}; }

std::vector<nn::CleaningRule> rules_of(std::initializer_list<std::pair<const char*, nn::CleaningAction>> rs) {
  std::vector<nn::CleaningRule> out;
  for (auto [p, a] : rs) out.push_back({p, a, ""});
  return out;
}

}  // namespace

// utf8

TEST(Utf8, ValidatesAndCounts) {
  EXPECT_TRUE(nn::utf8::is_valid("plain"));
  EXPECT_TRUE(nn::utf8::is_valid("“Café”"));
  EXPECT_FALSE(nn::utf8::is_valid("\xC0\xAF"));          // overlong
  EXPECT_FALSE(nn::utf8::is_valid("\xED\xA0\x80"));      // surrogate
  EXPECT_FALSE(nn::utf8::is_valid("\xE2\x80"));          // truncated
  EXPECT_EQ(nn::utf8::length("“Café”"), 6u);
  const std::string s = "a“b";
  EXPECT_EQ(nn::utf8::advance(s, 0, 2), 4u);
  EXPECT_EQ(nn::utf8::retreat(s, 4, 1), 1u);
  EXPECT_EQ(nn::utf8::codepoint_index(s, 4), 2u);
  EXPECT_FALSE(nn::utf8::is_boundary(s, 2));
}

TEST(RawText, RejectsInvalidInput) {
  EXPECT_THROW(nn::validate(nn::RawText{"ok", ""}), nn::DataError);
  EXPECT_THROW(nn::validate(nn::RawText{"\xFF", "id"}), nn::DataError);
  EXPECT_NO_THROW(nn::validate(nn::RawText{"ok", "id"}));
}

// clean_text

TEST(CleanText, EmptyRuleSetIsIdentity) { EXPECT_EQ(nn::clean_text(raw("no noise here"), {}), "no noise here"); }

TEST(CleanText, DeletesNumberedNoteLines) {
  const auto rules = rules_of({{R"(^\d+\.\s)", nn::CleaningAction::delete_line}});
  EXPECT_EQ(nn::clean_text(raw("He rode north.\n12. A note on the ford.\nHe came back.\n"), rules),
            "He rode north.\nHe came back.\n");
}

TEST(CleanText, JoinsHyphenBreaks) {
  const auto rules = rules_of({{R"(([A-Za-z])-(?:[ \t]*\r?\n[ \t]*|[ ])([a-z]))", nn::CleaningAction::join_hyphen_break}});
  EXPECT_EQ(nn::clean_text(raw("king-\ndom"), rules), "kingdom");
  EXPECT_EQ(nn::clean_text(raw("king- dom"), rules), "kingdom");
  EXPECT_EQ(nn::clean_text(raw("Wu-\nKingdom"), rules), "Wu-\nKingdom");  // capital after break is a real hyphen
}

TEST(CleanText, DefaultRulesRemovePageHeadersButKeepChapters) {
  const auto out = nn::clean_text(raw("THE ROMANCE\nCHAPTER 3\nText goes on.\n2. note\nover-\nthrown\n"),
                                  nn::default_cleaning_rules());
  EXPECT_EQ(out, "CHAPTER 3\nText goes on.\noverthrown\n");
}

TEST(CleanText, DeleteMatchKeepsLine) {
  const auto rules = rules_of({{R"(\[\d+\])", nn::CleaningAction::delete_match}});
  EXPECT_EQ(nn::clean_text(raw("a[1] b[22]\r\nc\n"), rules), "a b\r\nc\n");
}

TEST(CleanText, CompileErrorNamesRuleIndex) {
  const auto rules = rules_of({{"ok", nn::CleaningAction::delete_match}, {"(unclosed", nn::CleaningAction::delete_line}});
  try {
    nn::clean_text(raw("x"), rules);
    FAIL() << "expected RuleCompileError";
  } catch (const nn::RuleCompileError& e) {
    EXPECT_EQ(e.rule_index(), 1u);
  }
}

TEST(CleanText, RulesJsonRoundTrip) {
  const auto rules = nn::default_cleaning_rules();
  const auto back = nn::parse_cleaning_rules(nlohmann::json(rules).dump());
  ASSERT_EQ(back.size(), rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    EXPECT_EQ(back[i].pattern, rules[i].pattern);
    EXPECT_EQ(back[i].action, rules[i].action);
  }
  EXPECT_THROW(nn::parse_cleaning_rules(R"([{"pattern":"x","action":"explode"}])"), nn::DataError);
}

TEST(CleanText, IdempotentOnRandomNoise) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> pieces{"HEADER LINE\n", "1. note\n", "word ", "bro-\nken ", "A- b", "\n\n",
                                        "“Talk,” he said. ", "CHAPTER 2\n", "x- y", "12. 3. 4.\n"};
  const auto rules = nn::default_cleaning_rules();
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng() % 30);
    for (int i = 0; i < len; ++i) s += pieces[rng() % pieces.size()];
    const auto once = nn::clean_text(raw(s), rules);
    EXPECT_EQ(nn::clean_text(raw(once), rules), once) << s;
    EXPECT_LE(once.size(), s.size());
  }
}

// extract_corpus

TEST(Extract, NoQuotesNoItems) { EXPECT_TRUE(nn::extract_corpus("Nothing is said here.").empty()); }

TEST(Extract, WindowAroundSingleQuote) {
  const auto items = nn::extract_corpus("He said, “Go.” Then he left.");
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].talk, "Go.");
  EXPECT_NE(items[0].context.find("He said,"), std::string::npos);
  EXPECT_NE(items[0].context.find("Then he left."), std::string::npos);
  EXPECT_EQ(items[0].chapter, 1);
  EXPECT_EQ(items[0].char_offset, 9u);
  EXPECT_EQ(items[0].before(), "He said, ");
  EXPECT_EQ(items[0].after(), " Then he left.");
}

TEST(Extract, SpeakerAfterSpeechLandsInContext) {
  const auto items = nn::extract_corpus("“I will go to the east,” said Xuande, rising from his seat.");
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].talk, "I will go to the east,");
  EXPECT_NE(items[0].context.find("Xuande"), std::string::npos);
}

TEST(Extract, ChaptersFromHeadings) {
  const auto items = nn::extract_corpus("“a” x\n\nChapter One\n\n“b” y\n\nCHAPTER Two\n“c” z");
  ASSERT_EQ(items.size(), 3u);  // preamble folds into the first chapter
  EXPECT_EQ(items[0].chapter, 1);
  EXPECT_EQ(items[1].chapter, 1);
  EXPECT_EQ(items[2].chapter, 2);
  const auto headed = nn::extract_corpus("CHAPTER I\n“a” x\n\nCHAPTER II\n“b” y");
  ASSERT_EQ(headed.size(), 2u);
  EXPECT_EQ(headed[0].chapter, 1);
  EXPECT_EQ(headed[1].chapter, 2);
}

TEST(Extract, NestedQuotesStayInsideTalk) {
  const auto items = nn::extract_corpus("“He shouted “halt” twice,” she said.");
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].talk, "He shouted “halt” twice,");
}

TEST(Extract, UnbalancedQuoteIsFlaggedAndTruncatedAtParagraph) {
  const auto items = nn::extract_corpus("He began, “Listen to me\nnow\n\nNext paragraph.");
  ASSERT_EQ(items.size(), 1u);
  EXPECT_TRUE(items[0].unbalanced);
  EXPECT_EQ(items[0].talk, "Listen to me\nnow");
}

TEST(Extract, StraightQuotesOnlyWhenConfigured) {
  EXPECT_TRUE(nn::extract_corpus(R"(He said "go" now.)").empty());
  nn::ExtractOptions o;
  o.quote_style = nn::QuoteStyle::straight();
  const auto items = nn::extract_corpus(R"(He said "go" now.)", o);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].talk, "go");
}

TEST(Extract, ContextCapCountsCodePoints) {
  nn::ExtractOptions o;
  o.context_cap = 3;
  const auto items = nn::extract_corpus("ééééé “x” ààààà", o);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].context, "éé  àà");
  EXPECT_TRUE(nn::utf8::is_valid(items[0].context));
}

TEST(Extract, RoundTripAndOrderProperties) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> pieces{"Liu Bei said, ",   "“Go east.” ",      "Then he left. ", "\n\n",
                                        "“Nested “x” y,” ", "CHAPTER 2\n",      "“",              "”",
                                        "narration ",       "“Café au lait.” ", "Zhang Fei cried "};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int len = static_cast<int>(rng() % 25);
    for (int i = 0; i < len; ++i) text += pieces[rng() % pieces.size()];
    const auto items = nn::extract_corpus(text);
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& it = items[i];
      EXPECT_EQ(it.id, static_cast<std::int64_t>(i));
      if (i > 0) {
        EXPECT_GT(it.char_offset, items[i - 1].char_offset);
      }
      EXPECT_FALSE(it.talk.empty());
      EXPECT_NE(text.find(it.talk), std::string::npos);
      EXPECT_NE(text.find(std::string(it.before())), std::string::npos);
      EXPECT_NE(text.find(std::string(it.after())), std::string::npos);
      EXPECT_EQ(text.compare(it.char_offset, 3, "“"), 0);
      EXPECT_TRUE(nn::utf8::is_valid(it.context));
    }
    EXPECT_EQ(nn::extract_corpus(text), items);  // deterministic
  }
}

TEST(Corpus, JsonlRoundTrip) {
  const auto items = nn::extract_corpus("A said, “one.” B said, “two\n\nend");
  const auto text = nn::corpus_to_jsonl(items);
  EXPECT_EQ(nn::corpus_from_jsonl(text), items);
  EXPECT_EQ(text.substr(0, 7), R"({"id":0)");
  EXPECT_THROW(nn::corpus_from_jsonl("{\"id\":1,\"context\":\"\",\"talk\":\"a\",\"chapter\":1,\"char_offset\":0}\n"
                                     "{\"id\":0,\"context\":\"\",\"talk\":\"b\",\"chapter\":1,\"char_offset\":5}\n"),
               nn::DataError);
  EXPECT_THROW(nn::corpus_from_jsonl("not json\n"), nn::DataError);
}

// alias resolution

namespace {

nn::CharacterRegistry three_kingdoms() {
  return nn::registry_from_json(nlohmann::json::parse(R"({
    "characters": [
      {"id": "liu_bei", "canonical_name": "Liu Bei"},
      {"id": "liu_biao", "canonical_name": "Liu Biao"},
      {"id": "sima_yi", "canonical_name": "Sima Yi"},
      {"id": "sima_zhongxiang", "canonical_name": "Sima Zhongxiang"},
      {"id": "cao_cao", "canonical_name": "Cao Cao"}
    ],
    "alias_rules": [
      {"surface": "Xuande", "target": "liu_bei"},
      {"surface": "Lord Liu", "target": "liu_bei"},
      {"surface": "The First Ruler", "target": "liu_bei"},
      {"surface": "Sima", "target": "sima_zhongxiang", "chapter_range": [1, 3]},
      {"surface": "Sima", "target": "sima_yi", "chapter_range": [4, 120]},
      {"surface": "Lord", "target": "liu_bei", "ambiguity_group": ["liu_bei", "cao_cao", "liu_biao"]}
    ],
    "manual_append": ["Cao Cao"]
  })"));
}

}  // namespace

TEST(Resolve, SpecExamples) {
  const auto reg = three_kingdoms();
  for (const char* s : {"Xuande", "Lord Liu", "The First Ruler"}) {
    const auto r = nn::resolve(s, 57, "", reg);
    EXPECT_EQ(r.id, "liu_bei") << s;
    EXPECT_EQ(r.step, nn::ResolutionStep::global_alias);
  }
  const auto sima = nn::resolve("Sima", 1, "", reg);
  EXPECT_EQ(sima.id, "sima_zhongxiang");
  EXPECT_EQ(sima.step, nn::ResolutionStep::chapter_alias);
  EXPECT_EQ(nn::resolve("Sima", 90, "", reg).id, "sima_yi");
  const auto none = nn::resolve("Zzz-not-a-name", 5, "", reg);
  EXPECT_FALSE(none.resolved());
  EXPECT_EQ(none.step, nn::ResolutionStep::unresolved);
  EXPECT_EQ(nn::resolve("Cao Cao", 5, "", reg).step, nn::ResolutionStep::canonical);
}

TEST(Resolve, AmbiguityGroupUsesNearestFullName) {
  const auto reg = three_kingdoms();
  const std::string ctx = "Cao Cao rode in. Later Liu Bei waited, and the Lord spoke.";
  const auto r = nn::resolve("Lord", 1, ctx, reg, ctx.find("Lord"));
  EXPECT_EQ(r.id, "liu_bei");
  EXPECT_EQ(r.step, nn::ResolutionStep::context);
  const std::string after = "The Lord spoke before Liu Biao arrived, then Cao Cao.";
  EXPECT_EQ(nn::resolve("Lord", 1, after, reg, after.find("Lord")).id, "liu_biao");
  EXPECT_FALSE(nn::resolve("Lord", 1, "The Lord spoke.", reg).resolved());
}

TEST(Resolve, RuleOrderNeverMatters) {
  const auto base = three_kingdoms();
  auto rules = base.alias_rules();
  std::mt19937_64 rng(3);
  const std::vector<std::string> contexts{"", "Liu Bei and the Lord", "Cao Cao. Lord", "Lord Liu Biao"};
  for (int trial = 0; trial < 30; ++trial) {
    std::shuffle(rules.begin(), rules.end(), rng);
    const nn::CharacterRegistry shuffled(base.characters(), rules, base.manual_append());
    for (const char* s : {"Sima", "Lord", "Xuande", "Liu Bei", "nobody"})
      for (int ch : {1, 3, 4, 200})
        for (const auto& ctx : contexts) {
          const auto a = nn::resolve(s, ch, ctx, base);
          const auto b = nn::resolve(s, ch, ctx, shuffled);
          EXPECT_EQ(a.id, b.id);
          EXPECT_EQ(a.step, b.step);
        }
  }
}

TEST(Resolve, ChapterScopedRuleNeverFiresOutsideRange) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int first = 1 + static_cast<int>(rng() % 50);
    const int last = first + static_cast<int>(rng() % 20);
    const nn::CharacterRegistry reg({{"a", "Alpha One"}}, {{"Al", "a", nn::ChapterRange{first, last}, {}}});
    for (int k = 0; k < 10; ++k) {
      const int ch = 1 + static_cast<int>(rng() % 100);
      const auto r = nn::resolve("Al", ch, "", reg);
      EXPECT_EQ(r.resolved(), ch >= first && ch <= last) << first << ".." << last << " @" << ch;
    }
  }
}

TEST(Resolve, ResolvedIdsExist) {
  const auto reg = three_kingdoms();
  for (const auto& s : reg.all_surfaces())
    for (int ch = 1; ch < 6; ++ch) {
      const auto r = nn::resolve(s, ch, "Liu Bei met Cao Cao.", reg);
      if (r.id) {
        EXPECT_TRUE(reg.has_id(*r.id));
      }
    }
}

TEST(Registry, RejectsBrokenInput) {
  EXPECT_THROW(nn::CharacterRegistry({{"a", "A"}, {"b", "A"}}, {}), nn::DataError);
  EXPECT_THROW(nn::CharacterRegistry({{"a", "A"}}, {{"x", "missing", std::nullopt, {}}}), nn::DataError);
  EXPECT_THROW(nn::CharacterRegistry({{"a", "A"}}, {{"x", "a", nn::ChapterRange{5, 2}, {}}}), nn::DataError);
  EXPECT_THROW(nn::CharacterRegistry({{"a", "A"}}, {}, {"Nobody"}), nn::DataError);
}

TEST(ValidateRegistry, Warnings) {
  EXPECT_TRUE(nn::validate_registry(nn::CharacterRegistry{}).empty());
  const nn::CharacterRegistry conflict({{"a", "Sima Lang"}, {"b", "Sima Yi"}},
                                       {{"Sima", "a", std::nullopt, {}}, {"Sima", "b", std::nullopt, {}}});
  EXPECT_EQ(nn::validate_registry(conflict).size(), 1u);
  const nn::CharacterRegistry far({{"a", "A"}}, {{"x", "a", nn::ChapterRange{900, 950}, {}}});
  const auto w = nn::validate_registry(far, 120);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("unreachable"), std::string::npos);
  EXPECT_TRUE(nn::validate_registry(far).empty());
  const nn::CharacterRegistry shadow({{"a", "A"}, {"b", "B"}}, {{"B", "a", std::nullopt, {}}});
  EXPECT_EQ(nn::validate_registry(shadow).size(), 1u);
  EXPECT_TRUE(nn::validate_registry(three_kingdoms(), 120).empty());
}

// sentiment

namespace {

nn::CorpusItem item(std::int64_t id, std::string talk, std::string context = "", int chapter = 1,
                    std::size_t offset = 0) {
  nn::CorpusItem it;
  it.id = id;
  it.talk = std::move(talk);
  it.context = std::move(context);
  it.chapter = chapter;
  it.char_offset = offset ? offset : static_cast<std::size_t>(id) * 40;
  it.talk_at = 0;
  return it;
}

}  // namespace

TEST(Lexicon, ParsesSentiWordNetLayout) {
  const std::string text =
      "# SentiWordNet sample\n"
      "# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss\n"
      "a\t00001740\t0.125\t0\table#1\t(usually followed by `to') having the necessary means\n"
      "a\t00002098\t0\t0.75\tunable#1\tnot having the necessary means\n"
      "s\t00003000\t0.375\t0.125\table#2 capable#1\tclever\n"
      "n\t00004000\t0.5\t0\table#1\ta noun sense\n"
      "\n";
  const auto lex = nn::SentimentLexicon::parse(text);
  const auto able = lex.lookup("Able");
  ASSERT_TRUE(able);
  EXPECT_DOUBLE_EQ(able->positive, 0.25);  // mean of 0.125 and 0.375
  EXPECT_DOUBLE_EQ(able->negative, 0.0625);
  const auto first = lex.lookup("able", 'a', nn::SenseAggregation::first_sense);
  EXPECT_DOUBLE_EQ(first->positive, 0.125);
  EXPECT_DOUBLE_EQ(lex.lookup("able", 'n')->positive, 0.5);
  EXPECT_FALSE(lex.lookup("missing"));
  EXPECT_DOUBLE_EQ(lex.lookup("CAPABLE")->positive, 0.375);
}

TEST(Lexicon, RejectsMalformedLines) {
  EXPECT_THROW(nn::SentimentLexicon::parse("a\t1\t0.5\t0\tgood#1\n"), nn::DataError);
  EXPECT_THROW(nn::SentimentLexicon::parse("a\t1\t1.5\t0\tgood#1\tx\n"), nn::DataError);
  EXPECT_THROW(nn::SentimentLexicon::parse("q\t1\t0.5\t0\tgood#1\tx\n"), nn::DataError);
  EXPECT_THROW(nn::SentimentLexicon::parse("a\t1\tx\t0\tgood#1\tx\n"), nn::DataError);
  try {
    nn::SentimentLexicon::parse("# c\na\t1\t0.5\t0\tgood#1\tx\na\t2\t0.5\t-1\tbad#1\tx\n", "swn");
    FAIL();
  } catch (const nn::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("swn:3"), std::string::npos);
  }
}

TEST(Tagger, AdjectivesAndDegrees) {
  nn::LexiconTagger tagger;
  const auto toks = tagger.tag("Cao Cao is crafty and able, greater than the wisest and happiest.");
  std::vector<std::pair<std::string, std::string>> adj;
  for (const auto& t : toks)
    if (nn::is_adjective_tag(t.tag)) adj.emplace_back(t.tag, t.lemma);
  const std::vector<std::pair<std::string, std::string>> expect{
      {"JJ", "crafty"}, {"JJ", "able"}, {"JJR", "great"}, {"JJS", "wise"}, {"JJS", "happy"}};
  EXPECT_EQ(adj, expect);
  for (const auto& t : tagger.tag("The soldiers marched to the river and crossed it"))
    EXPECT_FALSE(nn::is_adjective_tag(t.tag)) << t.text;
}

TEST(Collect, CraftyAndAble) {
  const nn::CharacterRegistry reg({{"cao_cao", "Cao Cao"}, {"liu_bei", "Liu Bei"}}, {{"Mengde", "cao_cao", {}, {}}});
  const std::vector<nn::CorpusItem> corpus{item(0, "Cao Cao is crafty and able", "said Liu Bei.")};
  const std::vector<nn::ResolvedSpeaker> resolved{{0, 1, "liu_bei", "Liu Bei", nn::ResolutionStep::canonical, {}}};
  nn::LexiconTagger tagger;
  const auto w = nn::collect_evaluative(corpus, resolved, "Cao Cao", reg, tagger);
  EXPECT_EQ(w.target, "cao_cao");
  const std::map<std::string, std::uint64_t> expect{{"able", 1}, {"crafty", 1}};
  EXPECT_EQ(w.words, expect);
  EXPECT_THROW(nn::collect_evaluative(corpus, resolved, "Nobody", reg, tagger), nn::DataError);
  const auto lb = nn::collect_evaluative({item(0, "The river is wide", "said Liu Bei.")}, resolved, "cao_cao", reg, tagger);
  EXPECT_TRUE(lb.words.empty());
  const auto nouns = nn::collect_evaluative({item(0, "Mengde marched to the river", "")}, resolved, "cao_cao", reg, tagger);
  EXPECT_TRUE(nouns.words.empty());
}

TEST(Collect, ExcludesTargetsOwnSpeech) {
  const nn::CharacterRegistry reg({{"cao_cao", "Cao Cao"}, {"liu_bei", "Liu Bei"}, {"guan_yu", "Guan Yu"}}, {});
  std::vector<nn::CorpusItem> corpus;
  std::vector<nn::ResolvedSpeaker> resolved;
  const std::vector<std::string> speakers{"cao_cao", "liu_bei", "cao_cao", "guan_yu", "cao_cao"};
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    const std::string talk = speakers[i] == "cao_cao" ? "I am humble and wise, Liu Bei" : "Cao Cao is cruel and evil";
    corpus.push_back(item(static_cast<std::int64_t>(i), talk, "speech"));
    resolved.push_back({static_cast<std::int64_t>(i), 1, speakers[i], "", nn::ResolutionStep::canonical, {}});
  }
  nn::LexiconTagger tagger;
  const auto w = nn::collect_evaluative(corpus, resolved, "Cao Cao", reg, tagger);
  const std::map<std::string, std::uint64_t> expect{{"cruel", 2}, {"evil", 2}};
  EXPECT_EQ(w.words, expect);
}

TEST(Collect, ConversationsSplitByChapterAndGap) {
  std::vector<nn::CorpusItem> corpus{item(0, "a", "", 1, 10), item(1, "b", "", 1, 20), item(2, "c", "", 2, 30),
                                     item(3, "d", "", 2, 2000)};
  const auto runs = nn::conversations(corpus);
  const std::vector<std::pair<std::size_t, std::size_t>> expect{{0, 2}, {2, 3}, {3, 4}};
  EXPECT_EQ(runs, expect);
  const auto whole = nn::conversations(corpus, {std::nullopt});
  const std::vector<std::pair<std::size_t, std::size_t>> by_chapter{{0, 2}, {2, 4}};
  EXPECT_EQ(whole, by_chapter);
}

TEST(Score, SpecExamples) {
  const std::vector<nn::Polarity> two{{0.5, 0.0}, {0.25, 0.5}};
  EXPECT_EQ(nn::sentiment_score(two), 0.125);
  const std::vector<nn::Polarity> neutral{{0, 0}, {0, 0}};
  EXPECT_EQ(nn::sentiment_score(neutral), 0.0);
  EXPECT_THROW(nn::sentiment_score(std::vector<nn::Polarity>{}), nn::NoScoreError);

  nn::SentimentLexicon lex;
  lex.add("good", 'a', {0.5, 0.0});
  lex.add("bad", 'a', {0.25, 0.5});
  nn::EvaluativeWordSet w{"x", {{"good", 1}, {"bad", 1}, {"unknown", 4}}};
  const auto s = nn::score(w, lex);
  EXPECT_EQ(s.n, 2u);
  EXPECT_EQ(s.score, 0.125);
  EXPECT_THROW(nn::score(nn::EvaluativeWordSet{"x", {{"unknown", 3}}}, lex), nn::NoScoreError);
}

TEST(Score, InstancesVersusTypes) {
  nn::SentimentLexicon lex;
  lex.add("good", 'a', {1.0, 0.0});
  lex.add("bad", 'a', {0.0, 1.0});
  nn::EvaluativeWordSet w{"x", {{"good", 3}, {"bad", 1}}};
  EXPECT_DOUBLE_EQ(nn::score(w, lex).score, 0.5);
  const auto t = nn::score(w, lex, nn::ScoreUnit::types);
  EXPECT_EQ(t.n, 2u);
  EXPECT_DOUBLE_EQ(t.score, 0.0);
}

TEST(Score, MultisetLinearity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    nn::SentimentLexicon lex;
    nn::EvaluativeWordSet w{"x", {}};
    for (int i = 0; i < 8; ++i) {
      const std::string word = "w" + std::to_string(i);
      lex.add(word, 'a', {u(rng), u(rng)});
      w.words[word] = 1 + rng() % 5;
    }
    auto doubled = w;
    for (auto& [k, c] : doubled.words) c *= 2;
    EXPECT_NEAR(nn::score(w, lex).score, nn::score(doubled, lex).score, 1e-15);
  }
}

TEST(RankWords, OrderAndCap) {
  using V = std::vector<std::pair<std::string, std::uint64_t>>;
  EXPECT_EQ(nn::rank_words({"x", {{"a", 3}, {"b", 1}}}, 2), (V{{"a", 3}, {"b", 1}}));
  EXPECT_EQ(nn::rank_words({"x", {{"b", 2}, {"a", 2}}}, 5), (V{{"a", 2}, {"b", 2}}));
  EXPECT_TRUE(nn::rank_words({"x", {}}, 3).empty());
  EXPECT_EQ(nn::rank_words({"x", {{"a", 1}, {"b", 5}, {"c", 3}}}, 2), (V{{"b", 5}, {"c", 3}}));
  EXPECT_EQ(nn::word_frequency_csv(V{{"a", 2}}), "word,count\na,2\n");
}
