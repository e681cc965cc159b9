#pragma once

// Boundary to an external speaker-prediction model, over HTTP or a line-oriented subprocess.
//
// Request:  {"version":1,"items":[{"id":0,"context":"...","talk":"..."}]}
// Response: {"labels":[{"id":0,"surface":"Cao Cao"|null,"start":0,"end":7,"confidence":0.8}]}
// A response carrying a "version" other than 1 is a protocol error.

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "narrative_net/error.hpp"
#include "narrative_net/speaker_attribution.hpp"
#include "narrative_net/text_ingest.hpp"

namespace narrative_net {

inline constexpr int kAttributorProtocolVersion = 1;

struct AdapterPrediction {
  std::int64_t id = 0;
  std::optional<std::string> surface;
  std::size_t start = 0;
  std::size_t end = 0;
  double confidence = 0.0;
};

class Attributor {
 public:
  virtual ~Attributor() = default;
  /// Throws AdapterError on transport, timeout or protocol failure.
  virtual std::vector<AdapterPrediction> predict(std::span<const CorpusItem> items) = 0;
};

inline nlohmann::json attribution_request(std::span<const CorpusItem> items) {
  nlohmann::json req;
  req["version"] = kAttributorProtocolVersion;
  req["items"] = nlohmann::json::array();
  for (const auto& item : items)
    req["items"].push_back({{"id", item.id}, {"context", item.context}, {"talk", item.talk}});
  return req;
}

inline std::vector<AdapterPrediction> parse_attribution_response(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    if (j.contains("version") && j.at("version") != kAttributorProtocolVersion)
      throw AdapterError("attributor protocol version mismatch: got " + j.at("version").dump());
    std::vector<AdapterPrediction> out;
    for (const auto& l : j.at("labels")) {
      AdapterPrediction p;
      p.id = l.at("id").get<std::int64_t>();
      if (l.contains("surface") && !l.at("surface").is_null()) {
        p.surface = l.at("surface").get<std::string>();
        p.start = l.at("start").get<std::size_t>();
        p.end = l.at("end").get<std::size_t>();
      }
      p.confidence = l.value("confidence", 0.0);
      out.push_back(std::move(p));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw AdapterError(std::string("malformed attributor response: ") + e.what());
  }
}

/// POSTs batches to `<base_url>/attribute`.
class HttpAttributor : public Attributor {
 public:
  explicit HttpAttributor(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(30))
      : timeout_(timeout) {
    auto scheme = base_url.find("://");
    auto path_at = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    host_ = base_url.substr(0, path_at);
    path_ = path_at == std::string::npos ? "" : base_url.substr(path_at);
    if (!path_.empty() && path_.back() == '/') path_.pop_back();
    if (path_.size() < 10 || path_.compare(path_.size() - 10, 10, "/attribute") != 0) path_ += "/attribute";
  }

  std::vector<AdapterPrediction> predict(std::span<const CorpusItem> items) override {
    httplib::Client client(host_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    auto res = client.Post(path_, attribution_request(items).dump(), "application/json");
    if (!res) throw AdapterError("attributor at " + host_ + " unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw AdapterError("attributor returned HTTP " + std::to_string(res->status));
    return parse_attribution_response(res->body);
  }

 private:
  std::string host_;
  std::string path_;
  std::chrono::seconds timeout_;
};

/// Runs `command` under /bin/sh and exchanges one JSON object per line over its stdin/stdout.
class ProcessAttributor : public Attributor {
 public:
  explicit ProcessAttributor(const std::string& command, std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : timeout_(timeout) {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) throw AdapterError("cannot create pipes");
    pid_ = ::fork();
    if (pid_ < 0) throw AdapterError("cannot fork attributor process");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    ::signal(SIGPIPE, SIG_IGN);
  }

  ProcessAttributor(const ProcessAttributor&) = delete;
  ProcessAttributor& operator=(const ProcessAttributor&) = delete;

  ~ProcessAttributor() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == 0) {
        ::kill(pid_, SIGTERM);
        ::waitpid(pid_, &status, 0);
      }
    }
  }

  std::vector<AdapterPrediction> predict(std::span<const CorpusItem> items) override {
    const std::string line = attribution_request(items).dump() + "\n";
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t n = ::write(write_fd_, line.data() + done, line.size() - done);
      if (n <= 0) throw AdapterError("attributor process closed its input");
      done += static_cast<std::size_t>(n);
    }
    return parse_attribution_response(read_line());
  }

 private:
  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string out = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return out;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw AdapterError("attributor process timed out");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0 && errno == EINTR) continue;
      if (ready <= 0) throw AdapterError("attributor process timed out");
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n <= 0) throw AdapterError("attributor process exited without answering");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
  std::chrono::milliseconds timeout_;
};

/// Wraps a callable; used for in-process models and tests.
class FunctionAttributor : public Attributor {
 public:
  using Fn = std::function<std::vector<AdapterPrediction>(std::span<const CorpusItem>)>;
  explicit FunctionAttributor(Fn fn) : fn_(std::move(fn)) {}
  std::vector<AdapterPrediction> predict(std::span<const CorpusItem> items) override { return fn_(items); }

 private:
  Fn fn_;
};

struct ExternalAttribution {
  /// One slot per input item; empty = abstention.
  std::vector<std::optional<SpeakerLabel>> labels;
  std::size_t warnings = 0;
};

/// Queries the adapter once for the whole batch and validates each prediction against its
/// item. Invalid spans, unknown ids and duplicates become abstentions counted as warnings.
/// Adapter failures propagate before anything is returned, so callers never see a partial batch.
inline ExternalAttribution external_attribute(std::span<const CorpusItem> items, Attributor& adapter) {
  const auto predictions = adapter.predict(items);
  std::map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < items.size(); ++i) slot.emplace(items[i].id, i);

  ExternalAttribution result;
  result.labels.resize(items.size());
  std::vector<bool> seen(items.size(), false);
  for (const auto& p : predictions) {
    auto it = slot.find(p.id);
    if (it == slot.end() || seen[it->second]) {
      ++result.warnings;
      continue;
    }
    seen[it->second] = true;
    if (!p.surface) continue;
    SpeakerLabel label{p.id, *p.surface, p.start, p.end, LabelOrigin::external_model, p.confidence};
    try {
      validate_label(label, items[it->second]);
      result.labels[it->second] = std::move(label);
    } catch (const DataError&) {
      ++result.warnings;
    }
  }
  return result;
}

}  // namespace narrative_net
