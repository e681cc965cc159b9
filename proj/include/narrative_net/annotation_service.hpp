#pragma once

// HTTP labeling backend over a corpus and an append-only label log.
//
//   GET  /api/items?status=unlabeled|labeled|all&offset=0&limit=50
//   GET  /api/items/{id}         -> {id, context, talk, chapter, status, label, candidates:[{surface,start,end}]}
//   POST /api/items/{id}/label   <- {surface, start, end} | {skip: true}
//   GET  /api/progress           -> {total, labeled, skipped}
//   GET  /                       -> UI (files from ui_dir, or a small built-in page)

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "narrative_net/alias_resolution.hpp"
#include "narrative_net/error.hpp"
#include "narrative_net/speaker_attribution.hpp"
#include "narrative_net/text_ingest.hpp"

namespace narrative_net {

struct Progress {
  std::size_t total = 0;
  std::size_t labeled = 0;
  std::size_t skipped = 0;

  bool operator==(const Progress&) const = default;
};

inline Progress progress_of(std::size_t total, const std::map<std::int64_t, LabelEntry>& decisions) {
  Progress p{total, 0, 0};
  for (const auto& [id, e] : decisions) (e.label ? p.labeled : p.skipped)++;
  return p;
}

/// Corpus plus label store. Replays the log on construction, so a restarted session reports
/// the same progress; a corrupt log line aborts with its line number.
class AnnotationSession {
 public:
  AnnotationSession(std::vector<CorpusItem> corpus, CharacterRegistry registry, const std::string& log_path,
                    AttributionConfig config = {})
      : corpus_(std::move(corpus)), registry_(std::move(registry)), config_(std::move(config)),
        store_(log_path, corpus_) {
    for (std::size_t i = 0; i < corpus_.size(); ++i) index_.emplace(corpus_[i].id, i);
  }

  AnnotationSession(const AnnotationSession&) = delete;
  AnnotationSession& operator=(const AnnotationSession&) = delete;

  const std::vector<CorpusItem>& corpus() const noexcept { return corpus_; }
  LabelStore& store() noexcept { return store_; }

  const CorpusItem* item(std::int64_t id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &corpus_[it->second];
  }

  Progress progress() const { return progress_of(corpus_.size(), store_.current()); }

  std::vector<Candidate> candidates(const CorpusItem& item) const { return rank_candidates(item, registry_, config_); }

 private:
  std::vector<CorpusItem> corpus_;
  CharacterRegistry registry_;
  AttributionConfig config_;
  LabelStore store_;
  std::map<std::int64_t, std::size_t> index_;
};

inline const char* kBuiltinAnnotationPage = R"HTML(<!doctype html>
<html><head><meta charset="utf-8"><title>narrative-net labeling</title>
<style>body{font:16px/1.5 sans-serif;max-width:48em;margin:2em auto}#talk{font-weight:bold}
.c{margin:.2em;padding:.2em .5em;border:1px solid #888;cursor:pointer}</style></head>
<body><div id="p"></div><p id="ctx"></p><p id="talk"></p><div id="cands"></div>
<p>Keys: 1-9 pick a candidate, s skips.</p>
<script>
let cur=null;
async function prog(){const p=await (await fetch('/api/progress')).json();
 document.getElementById('p').textContent=p.labeled+' labeled, '+p.skipped+' skipped of '+p.total;}
async function next(){await prog();
 const l=await (await fetch('/api/items?status=unlabeled&limit=1')).json();
 if(!l.items.length){cur=null;document.getElementById('ctx').textContent='All items labeled.';
  document.getElementById('talk').textContent='';document.getElementById('cands').textContent='';return;}
 cur=await (await fetch('/api/items/'+l.items[0].id)).json();
 document.getElementById('ctx').textContent=cur.context;
 document.getElementById('talk').textContent=cur.talk;
 const c=document.getElementById('cands');c.textContent='';
 cur.candidates.forEach((x,i)=>{const b=document.createElement('button');b.className='c';
  b.textContent=(i+1)+': '+x.surface;b.onclick=()=>send(x);c.appendChild(b);});}
async function send(body){if(!cur)return;
 const r=await fetch('/api/items/'+cur.id+'/label',{method:'POST',headers:{'Content-Type':'application/json'},
  body:JSON.stringify(body)});if(!r.ok)alert((await r.json()).error);next();}
document.addEventListener('keydown',e=>{if(!cur)return;
 if(e.key==='s')send({skip:true});const i=parseInt(e.key,10);
 if(i>=1&&i<=cur.candidates.length)send(cur.candidates[i-1]);});
next();
</script></body></html>
)HTML";

namespace detail {

inline void json_reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void error_reply(httplib::Response& res, int status, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = message;
  json_reply(res, status, j);
}

inline std::optional<std::size_t> query_size(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  const auto v = req.get_param_value(key);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) throw DataError(std::string(key));
  return std::stoull(v);
}

inline std::string status_of(const std::map<std::int64_t, LabelEntry>& decisions, std::int64_t id) {
  auto it = decisions.find(id);
  if (it == decisions.end()) return "unlabeled";
  return it->second.label ? "labeled" : "skipped";
}

}  // namespace detail

/// Registers the API routes on `server`. The session must outlive the server.
inline void mount_annotation_api(httplib::Server& server, AnnotationSession& session,
                                 const std::string& ui_dir = {}) {
  server.Get("/api/progress", [&](const httplib::Request&, httplib::Response& res) {
    const auto p = session.progress();
    nlohmann::ordered_json j;
    j["total"] = p.total;
    j["labeled"] = p.labeled;
    j["skipped"] = p.skipped;
    detail::json_reply(res, 200, j);
  });

  server.Get("/api/items", [&](const httplib::Request& req, httplib::Response& res) {
    const std::string status = req.has_param("status") ? req.get_param_value("status") : "all";
    if (status != "unlabeled" && status != "labeled" && status != "all")
      return detail::error_reply(res, 400, "status must be unlabeled, labeled or all");
    std::size_t offset = 0, limit = 50;
    try {
      offset = detail::query_size(req, "offset").value_or(0);
      limit = detail::query_size(req, "limit").value_or(50);
    } catch (const DataError& e) {
      return detail::error_reply(res, 400, std::string("invalid ") + e.what());
    }
    const auto decisions = session.store().current();
    nlohmann::ordered_json items = nlohmann::ordered_json::array();
    std::size_t matched = 0;
    for (const auto& item : session.corpus()) {
      const auto s = detail::status_of(decisions, item.id);
      // skipped counts as decided, so it is listed under "labeled"
      if (status == "unlabeled" && s != "unlabeled") continue;
      if (status == "labeled" && s == "unlabeled") continue;
      if (matched++ < offset || items.size() >= limit) continue;
      nlohmann::ordered_json j;
      j["id"] = item.id;
      j["chapter"] = item.chapter;
      j["talk"] = item.talk;
      j["status"] = s;
      items.push_back(j);
    }
    nlohmann::ordered_json body;
    body["total"] = matched;
    body["offset"] = offset;
    body["items"] = items;
    detail::json_reply(res, 200, body);
  });

  server.Get(R"(/api/items/(-?\d+))", [&](const httplib::Request& req, httplib::Response& res) {
    const auto* item = session.item(std::stoll(req.matches[1]));
    if (!item) return detail::error_reply(res, 404, "unknown item");
    const auto decisions = session.store().current();
    nlohmann::ordered_json j;
    j["id"] = item->id;
    j["context"] = item->context;
    j["talk"] = item->talk;
    j["chapter"] = item->chapter;
    j["talk_at"] = item->talk_at;
    j["status"] = detail::status_of(decisions, item->id);
    auto d = decisions.find(item->id);
    if (d != decisions.end() && d->second.label) {
      nlohmann::ordered_json l;
      l["surface"] = d->second.label->speaker_surface;
      l["start"] = d->second.label->start;
      l["end"] = d->second.label->end;
      j["label"] = l;
    } else {
      j["label"] = nullptr;
    }
    j["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : session.candidates(*item)) {
      nlohmann::ordered_json cj;
      cj["surface"] = c.surface;
      cj["start"] = c.start;
      cj["end"] = c.end;
      j["candidates"].push_back(cj);
    }
    detail::json_reply(res, 200, j);
  });

  server.Post(R"(/api/items/(-?\d+)/label)", [&](const httplib::Request& req, httplib::Response& res) {
    const auto* item = session.item(std::stoll(req.matches[1]));
    if (!item) return detail::error_reply(res, 404, "unknown item");
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      return detail::error_reply(res, 400, "body is not JSON");
    }
    try {
      if (body.is_object() && body.value("skip", false)) {
        session.store().put_skip(item->id);
      } else {
        SpeakerLabel l;
        l.item_id = item->id;
        l.speaker_surface = body.at("surface").get<std::string>();
        l.start = body.at("start").get<std::size_t>();
        l.end = body.at("end").get<std::size_t>();
        l.origin = LabelOrigin::human;
        l.confidence = 1.0;
        session.store().put(l);
      }
    } catch (const nlohmann::json::exception&) {
      return detail::error_reply(res, 400, "expected {surface, start, end} or {skip: true}");
    } catch (const IoError& e) {
      return detail::error_reply(res, 500, e.what());
    } catch (const DataError& e) {
      return detail::error_reply(res, 400, e.what());
    }
    const auto p = session.progress();
    nlohmann::ordered_json j;
    j["ok"] = true;
    j["total"] = p.total;
    j["labeled"] = p.labeled;
    j["skipped"] = p.skipped;
    detail::json_reply(res, 200, j);
  });

  if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) {
    server.set_mount_point("/", ui_dir);
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kBuiltinAnnotationPage, "text/html; charset=utf-8");
    });
  }
}

/// Binds and serves until `server.stop()`. Throws IoError when the address is unavailable.
inline void serve_annotation(httplib::Server& server, AnnotationSession& session, const std::string& host, int port,
                             const std::string& ui_dir = {}) {
  mount_annotation_api(server, session, ui_dir);
  if (!server.bind_to_port(host, port)) throw IoError(host + ":" + std::to_string(port), "address unavailable");
  server.listen_after_bind();
}

}  // namespace narrative_net
