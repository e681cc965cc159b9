#include <gtest/gtest.h>
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "narrative_net/annotation_service.hpp"
#include "narrative_net/pipeline.hpp"

namespace nn = narrative_net;
namespace fs = std::filesystem;

namespace {

const fs::path kSample = fs::path(NN_SOURCE_DIR) / "data" / "sample";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nn_service_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<nn::CorpusItem> corpus() {
  return nn::extract_corpus(
      "Liu Bei looked at Cao Cao. Cao Cao said, “The heroes of the age are you and I.”\n\n"
      "Zhang Fei shouted, “Brother, let me go!”\n\n"
      "“Wait,” said Guan Yu.\n\n"
      "“Nobody knows,” someone whispered.\n");
}

nn::CharacterRegistry heroes() {
  return nn::CharacterRegistry(
      {{"liu_bei", "Liu Bei"}, {"cao_cao", "Cao Cao"}, {"zhang_fei", "Zhang Fei"}, {"guan_yu", "Guan Yu"}}, {});
}

/// Serves a session on an ephemeral port for the lifetime of the object.
class Running {
 public:
  explicit Running(nn::AnnotationSession& session) {
    nn::mount_annotation_api(server_, session);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Running() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(std::chrono::seconds(5));
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

nlohmann::json get_json(httplib::Client& c, const std::string& path, int expect = 200) {
  auto res = c.Get(path);
  EXPECT_TRUE(res) << path;
  if (!res) return {};
  EXPECT_EQ(res->status, expect) << path << " " << res->body;
  return nlohmann::json::parse(res->body);
}

nlohmann::json post_json(httplib::Client& c, const std::string& path, const std::string& body, int expect = 200) {
  auto res = c.Post(path, body, "application/json");
  EXPECT_TRUE(res) << path;
  if (!res) return {};
  EXPECT_EQ(res->status, expect) << path << " " << res->body;
  return nlohmann::json::parse(res->body);
}

std::string label_body(const nn::CorpusItem& item, const std::string& surface) {
  const auto pos = item.context.find(surface);
  return nlohmann::json{{"surface", surface}, {"start", pos}, {"end", pos + surface.size()}}.dump();
}

}  // namespace

TEST(Api, FreshLogListsEverythingUnlabeled) {
  TempDir dir;
  nn::AnnotationSession session(corpus(), heroes(), dir.file("labels.jsonl"));
  Running srv(session);
  auto c = srv.client();
  const auto p = get_json(c, "/api/progress");
  EXPECT_EQ(p, (nlohmann::json{{"total", 4}, {"labeled", 0}, {"skipped", 0}}));
  const auto items = get_json(c, "/api/items?status=unlabeled");
  EXPECT_EQ(items.at("total"), 4);
  ASSERT_EQ(items.at("items").size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(items["items"][i]["id"], i);
  EXPECT_EQ(get_json(c, "/api/items?status=labeled").at("total"), 0);
  EXPECT_EQ(get_json(c, "/api/items?offset=1&limit=2").at("items").size(), 2u);
  get_json(c, "/api/items?status=bogus", 400);
  get_json(c, "/api/items?limit=-3", 400);
  auto page = c.Get("/");
  ASSERT_TRUE(page);
  EXPECT_NE(page->body.find("/api/progress"), std::string::npos);
}

TEST(Api, ItemDetailCarriesCandidates) {
  TempDir dir;
  nn::AnnotationSession session(corpus(), heroes(), dir.file("labels.jsonl"));
  Running srv(session);
  auto c = srv.client();
  const auto item = get_json(c, "/api/items/0");
  EXPECT_EQ(item.at("talk"), "The heroes of the age are you and I.");
  EXPECT_TRUE(item.at("label").is_null());
  EXPECT_EQ(item.at("status"), "unlabeled");
  ASSERT_FALSE(item.at("candidates").empty());
  EXPECT_EQ(item["candidates"][0]["surface"], "Cao Cao");
  const std::string ctx = item.at("context");
  const std::size_t s = item["candidates"][0]["start"], e = item["candidates"][0]["end"];
  EXPECT_EQ(ctx.substr(s, e - s), "Cao Cao");
  EXPECT_TRUE(get_json(c, "/api/items/3").at("candidates").empty());
  get_json(c, "/api/items/99", 404);
}

TEST(Api, LabelingUpdatesProgressAndSurvivesRestart) {
  TempDir dir;
  const auto log = dir.file("labels.jsonl");
  const auto items = corpus();
  nlohmann::json before;
  {
    nn::AnnotationSession session(items, heroes(), log);
    Running srv(session);
    auto c = srv.client();
    auto r = post_json(c, "/api/items/0/label", label_body(items[0], "Cao Cao"));
    EXPECT_EQ(r.at("labeled"), 1);
    r = post_json(c, "/api/items/3/label", R"({"skip":true})");
    EXPECT_EQ(r.at("skipped"), 1);
    r = post_json(c, "/api/items/0/label", label_body(items[0], "Liu Bei"));  // relabel, not a new decision
    EXPECT_EQ(r.at("labeled"), 1);
    const auto unl = get_json(c, "/api/items?status=unlabeled");
    EXPECT_EQ(unl.at("total"), 2);
    EXPECT_EQ(get_json(c, "/api/items?status=labeled").at("total"), 2);
    const auto detail = get_json(c, "/api/items/0");
    EXPECT_EQ(detail.at("label").at("surface"), "Liu Bei");
    before = get_json(c, "/api/progress");
  }
  nn::AnnotationSession reopened(items, heroes(), log);
  Running srv(reopened);
  auto c = srv.client();
  EXPECT_EQ(get_json(c, "/api/progress"), before);
  EXPECT_EQ(get_json(c, "/api/items/0").at("label").at("surface"), "Liu Bei");
}

TEST(Api, RejectsBadLabels) {
  TempDir dir;
  const auto items = corpus();
  nn::AnnotationSession session(items, heroes(), dir.file("labels.jsonl"));
  Running srv(session);
  auto c = srv.client();
  post_json(c, "/api/items/0/label", R"({"surface":"Cao Cao","start":5,"end":3})", 400);
  post_json(c, "/api/items/0/label", R"({"surface":"Cao Cao","start":0,"end":7})", 400);
  post_json(c, "/api/items/0/label", "{not json", 400);
  post_json(c, "/api/items/0/label", R"({"surface":"Cao Cao"})", 400);
  post_json(c, "/api/items/42/label", label_body(items[0], "Cao Cao"), 404);
  EXPECT_EQ(get_json(c, "/api/progress").at("labeled"), 0);
  EXPECT_FALSE(fs::exists(dir.file("labels.jsonl")));
}

TEST(Api, TruncatedLogRecovers) {
  TempDir dir;
  const auto log = dir.file("labels.jsonl");
  const auto items = corpus();
  {
    nn::AnnotationSession session(items, heroes(), log);
    session.store().put_skip(1);
    session.store().put_skip(2);
  }
  auto text = nn::read_file(log);
  nn::write_file(log, text.substr(0, text.size() - 5));  // cut into the last line
  nn::AnnotationSession session(items, heroes(), log);
  EXPECT_EQ(session.progress(), (nn::Progress{4, 0, 1}));
  Running srv(session);
  auto c = srv.client();
  post_json(c, "/api/items/2/label", R"({"skip":true})");
  EXPECT_EQ(get_json(c, "/api/progress").at("skipped"), 2);
  nn::AnnotationSession again(items, heroes(), log);
  EXPECT_EQ(again.progress(), (nn::Progress{4, 0, 2}));
}

TEST(Api, CorruptLogRefusesToStart) {
  TempDir dir;
  const auto log = dir.file("labels.jsonl");
  nn::write_file(log, "{\"item_id\":0,\"skip\":true}\n{broken\n{\"item_id\":1,\"skip\":true}\n");
  try {
    nn::AnnotationSession session(corpus(), heroes(), log);
    FAIL();
  } catch (const nn::LogCorruptError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Api, BusyPortIsAnIoError) {
  TempDir dir;
  nn::AnnotationSession session(corpus(), heroes(), dir.file("l.jsonl"));
  // a plain listening socket, without SO_REUSEPORT, holds the port
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(::listen(fd, 1), 0);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  httplib::Server second;
  EXPECT_THROW(nn::serve_annotation(second, session, "127.0.0.1", ntohs(addr.sin_port)), nn::IoError);
  ::close(fd);
}

// pipeline

namespace {

nn::PipelineConfig sample_config() { return nn::PipelineConfig::load((kSample / "pipeline.json").string()); }

}  // namespace

TEST(Pipeline, ConfigValidation) {
  auto c = sample_config();
  EXPECT_NO_THROW(c.validate());
  auto no_registry = c;
  no_registry.registry.clear();
  EXPECT_THROW(no_registry.validate(), nn::ConfigError);
  auto missing = c;
  missing.raw = "/nonexistent/book.txt";
  EXPECT_THROW(missing.validate(), nn::ConfigError);
  auto unseeded = c;
  unseeded.seed.reset();
  EXPECT_THROW(unseeded.validate(), nn::ConfigError);
  unseeded.swi_samples = 0;
  EXPECT_NO_THROW(unseeded.validate());
  auto quotes = c;
  quotes.quote_style = "angled";
  EXPECT_THROW(quotes.validate(), nn::ConfigError);
  EXPECT_THROW(nn::PipelineConfig::from_json(nlohmann::json{{"raw", 5}}), nn::ConfigError);
}

TEST(Pipeline, MissingRegistryFailsBeforeWriting) {
  TempDir dir;
  auto c = sample_config();
  c.registry.clear();
  EXPECT_THROW(nn::run_pipeline(c, dir.path / "out"), nn::ConfigError);
  EXPECT_FALSE(fs::exists(dir.path / "out" / "manifest.json"));
}

TEST(Pipeline, DeterministicManifest) {
  TempDir dir;
  const auto c = sample_config();
  const auto a = nn::run_pipeline(c, dir.path / "a");
  const auto b = nn::run_pipeline(c, dir.path / "b");
  EXPECT_EQ(a.manifest, b.manifest);
  EXPECT_EQ(nn::read_file((dir.path / "a" / "manifest.json").string()), a.manifest);
  std::vector<std::string> names;
  for (const auto& art : a.artifacts) {
    names.push_back(art.name);
    const auto content = nn::read_file((dir.path / "a" / art.name).string());
    EXPECT_EQ(nn::sha256_hex(content), art.sha256);
    EXPECT_EQ(content.size(), art.bytes);
  }
  const std::vector<std::string> expect{"corpus.jsonl", "labels.jsonl",  "resolved.jsonl", "network.gexf",
                                        "stages.json",  "metrics.json", "sentiment.json"};
  EXPECT_EQ(names, expect);
  const auto m = nlohmann::json::parse(a.manifest);
  EXPECT_EQ(m.at("seed"), 42);
  auto reseeded = c;
  reseeded.seed = 43;
  EXPECT_NE(nn::run_pipeline(reseeded, dir.path / "c").manifest, a.manifest);
}

TEST(Pipeline, FailingStageIsNamed) {
  TempDir dir;
  auto c = sample_config();
  const auto bad_plan = dir.file("plan.json");
  nn::write_file(bad_plan, R"({"markers":[{"regex":"this phrase is not in the book"}]})");
  c.stages = bad_plan;
  try {
    nn::run_pipeline(c, dir.path / "out");
    FAIL();
  } catch (const nn::StageError& e) {
    EXPECT_EQ(e.stage(), "graph");
    EXPECT_EQ(e.kind(), nn::ErrorKind::config);
  }
  EXPECT_TRUE(fs::exists(dir.path / "out" / "resolved.jsonl"));
  EXPECT_FALSE(fs::exists(dir.path / "out" / "manifest.json"));

  auto c2 = sample_config();
  const auto bad_lex = dir.file("lex.txt");
  nn::write_file(bad_lex, "a\t1\t2.0\t0\tgood#1\tgloss\n");
  c2.lexicon = bad_lex;
  try {
    nn::run_pipeline(c2, dir.path / "out2");
    FAIL();
  } catch (const nn::StageError& e) {
    EXPECT_EQ(e.stage(), "sentiment");
    EXPECT_EQ(e.kind(), nn::ErrorKind::data);
  }
}

TEST(Pipeline, HumanLabelsOverrideHeuristic) {
  const auto items = corpus();
  const auto reg = heroes();
  const auto pos = items[0].context.find("Liu Bei");
  const std::vector<nn::LabelEntry> human{{0, nn::SpeakerLabel{0, "Liu Bei", pos, pos + 7}}, {1, std::nullopt}};
  const auto labels = nn::attribute_corpus(items, reg, human);
  ASSERT_GE(labels.size(), 3u);
  EXPECT_EQ(labels[0].label->speaker_surface, "Liu Bei");
  EXPECT_TRUE(labels[1].skipped());
  EXPECT_EQ(labels[2].label->origin, nn::LabelOrigin::heuristic);
  const auto outcome = nn::resolve_labels(items, labels, reg);
  ASSERT_EQ(outcome.resolved.size(), 2u);
  EXPECT_EQ(outcome.resolved[0].speaker, "liu_bei");
  EXPECT_EQ(outcome.resolved[1].speaker, "guan_yu");
}

// CLI

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + NN_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli("extract --bogus"), 1);
  EXPECT_EQ(cli("extract --in /nonexistent.txt"), 1);
  nn::write_file(dir.file("bad.txt"), "\xFF\xFE");
  EXPECT_EQ(cli("extract --in " + q(dir.file("bad.txt")) + " --out " + q(dir.file("c.jsonl"))), 2);
  nn::write_file(dir.file("graph.csv"), "source,target,weight\na,b,1\n");
  EXPECT_EQ(cli("metrics --graph " + q(dir.file("graph.csv")) + " --out " + q(dir.file("r.json"))), 1);  // no seed
  EXPECT_EQ(cli("metrics --swi-samples 0 --graph " + q(dir.file("graph.csv")) + " --out " + q(dir.file("r.json"))), 0);
  nn::write_file(dir.file("cfg.json"), R"({"raw": ")" + (kSample / "river_chronicle.txt").string() + R"("})");
  EXPECT_EQ(cli("run --config " + q(dir.file("cfg.json")) + " --out-dir " + q(dir.path / "o")), 1);
}

TEST(Cli, StepwiseMatchesPipeline) {
  TempDir dir;
  const auto d = dir.path;
  ASSERT_EQ(cli("extract --in " + q(kSample / "river_chronicle.txt") + " --rules " + q(kSample / "rules.json") +
                " --out " + q(d / "corpus.jsonl")),
            0);
  ASSERT_EQ(cli("attribute --corpus " + q(d / "corpus.jsonl") + " --registry " + q(kSample / "chars.json") +
                " --out " + q(d / "labels.jsonl")),
            0);
  ASSERT_EQ(cli("resolve --corpus " + q(d / "corpus.jsonl") + " --labels " + q(d / "labels.jsonl") +
                " --registry " + q(kSample / "chars.json") + " --out " + q(d / "resolved.jsonl")),
            0);
  ASSERT_EQ(cli("--out-dir " + q(d / "g") + " graph --resolved " + q(d / "resolved.jsonl") + " --registry " +
                q(kSample / "chars.json") + " --stages " + q(kSample / "plan.json") + " --corpus " +
                q(d / "corpus.jsonl")),
            0);
  ASSERT_EQ(cli("--seed 42 metrics --graph " + q(d / "g" / "full.gexf") + " --out " + q(d / "report.json")), 0);
  ASSERT_EQ(cli("augment --corpus " + q(d / "corpus.jsonl") + " --labels " + q(d / "labels.jsonl") +
                " --squad-out " + q(d / "squad.json")),
            0);
  ASSERT_EQ(cli("sentiment --corpus " + q(d / "corpus.jsonl") + " --resolved " + q(d / "resolved.jsonl") +
                " --registry " + q(kSample / "chars.json") + " --lexicon " + q(kSample / "lexicon_swn.txt") +
                " --target \"Wen Tao\" --out " + q(d / "sent.json") + " --words-csv " + q(d / "words.csv")),
            0);
  ASSERT_EQ(cli("--config " + q(kSample / "pipeline.json") + " --out-dir " + q(d / "run") + " run"), 0);

  for (const char* f : {"corpus.jsonl", "labels.jsonl", "resolved.jsonl"})
    EXPECT_EQ(nn::read_file((d / f).string()), nn::read_file((d / "run" / f).string())) << f;
  const auto stats = nlohmann::json::parse(nn::read_file((d / "g" / "stats.json").string()));
  const auto stages = nlohmann::json::parse(nn::read_file((d / "run" / "stages.json").string()));
  EXPECT_EQ(stats.at("stages"), stages.at("stages"));
  EXPECT_TRUE(fs::exists(d / "report.centralities.csv"));
  EXPECT_TRUE(fs::exists(d / "squad.json.manifest.json"));
  EXPECT_EQ(nn::read_file((d / "words.csv").string()).rfind("word,count\n", 0), 0u);

  // a second attribute pass leaves already decided items alone
  const auto log = nn::read_file((d / "labels.jsonl").string());
  ASSERT_EQ(cli("attribute --corpus " + q(d / "corpus.jsonl") + " --registry " + q(kSample / "chars.json") +
                " --out " + q(d / "labels.jsonl")),
            0);
  EXPECT_EQ(nn::read_file((d / "labels.jsonl").string()), log);
}

TEST(Cli, UnreachableAdapterLeavesLogUntouched) {
  TempDir dir;
  const auto d = dir.path;
  ASSERT_EQ(cli("extract --in " + q(kSample / "river_chronicle.txt") + " --out " + q(d / "corpus.jsonl")), 0);
  EXPECT_NE(cli("attribute --corpus " + q(d / "corpus.jsonl") + " --registry " + q(kSample / "chars.json") +
                " --adapter http://127.0.0.1:1 --timeout 2 --out " + q(d / "labels.jsonl")),
            0);
  EXPECT_FALSE(fs::exists(d / "labels.jsonl"));
}
