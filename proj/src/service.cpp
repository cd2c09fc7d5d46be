#include "nlchart/service.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "nlchart/error.hpp"

namespace nlchart {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomically(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(Errc::kIo, "cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::optional<json> parse_body(std::string_view body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

// "s12" with prefix "s" -> 12; anything else -> 0.
std::size_t serial_of(const std::string& id, std::string_view prefix) {
  if (!id.starts_with(prefix) || id.size() == prefix.size()) return 0;
  auto digits = id.substr(prefix.size());
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) return 0;
  return std::stoul(digits);
}

json columns_json(const Dataset& d) {
  json cols = json::array();
  for (const auto& c : d.columns()) cols.push_back({{"name", c.name}, {"type", to_string(c.type)}});
  return cols;
}

}  // namespace

Reply Reply::json(const nlohmann::json& body, int status) { return {status, body.dump(2) + "\n"}; }

Reply Reply::error(int status, std::string_view code, std::string_view message) {
  return json({{"error", {{"code", code}, {"message", message}}}}, status);
}

Service::Service(ServiceOptions options) : options_(std::move(options)), phrases_(SuggestionIndex::builtin()) {
  datasets_[kSampleDataset] = std::make_shared<const Dataset>(Dataset::sample());
  restore();
}

Service::~Service() = default;

std::shared_ptr<Service::Slot> Service::find_session(const std::string& id) const {
  std::shared_lock guard(registry_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<const Dataset> Service::find_dataset(const std::string& id) const {
  std::shared_lock guard(registry_);
  auto it = datasets_.find(id);
  return it == datasets_.end() ? nullptr : it->second;
}

std::string Service::register_dataset(std::shared_ptr<const Dataset> dataset, std::string id) {
  std::unique_lock guard(registry_);
  if (id.empty()) id = "d" + std::to_string(next_dataset_++);
  next_dataset_ = std::max(next_dataset_, serial_of(id, "d") + 1);
  datasets_[id] = std::move(dataset);
  return id;
}

std::string Service::register_session(std::shared_ptr<Slot> slot, std::string id) {
  std::unique_lock guard(registry_);
  if (id.empty()) id = "s" + std::to_string(next_session_++);
  next_session_ = std::max(next_session_, serial_of(id, "s") + 1);
  sessions_[id] = std::move(slot);
  return id;
}

void Service::restore() {
  if (options_.data_dir.empty()) return;
  const fs::path root(options_.data_dir);
  std::error_code ec;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root / "datasets", ec)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    if (p.extension() != ".csv") continue;
    auto id = p.stem().string();
    register_dataset(std::make_shared<const Dataset>(Dataset::parse_csv(read_file(p), id)), id);
  }
  files.clear();
  for (const auto& e : fs::directory_iterator(root / "sessions", ec)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    if (p.extension() != ".json") continue;
    auto doc = json::parse(read_file(p));
    auto dataset = find_dataset(doc.at("dataset_id").get<std::string>());
    if (!dataset) throw Error(Errc::kNotFound, p.string() + ": dataset is gone");
    auto slot = std::make_shared<Slot>();
    slot->dataset_id = doc["dataset_id"].get<std::string>();
    slot->workspace = std::make_unique<Workspace>(dataset, Session::replay(dataset, doc.at("history")));
    register_session(std::move(slot), p.stem().string());
  }
}

void Service::snapshot() const {
  if (options_.data_dir.empty()) return;
  std::map<std::string, std::shared_ptr<Slot>> sessions;
  {
    std::shared_lock guard(registry_);
    sessions = sessions_;
  }
  for (const auto& [id, slot] : sessions) {
    std::lock_guard guard(slot->lock);
    json doc{{"dataset_id", slot->dataset_id}, {"history", slot->workspace->session().history_json()}};
    write_file_atomically(fs::path(options_.data_dir) / "sessions" / (id + ".json"), doc.dump(2) + "\n");
  }
}

Reply Service::create_dataset(std::string_view body, std::string_view content_type) {
  std::string csv(body);
  std::string name = "upload";
  if (content_type.starts_with(kJson)) {
    auto j = parse_body(body);
    if (!j || !j->contains("csv") || !(*j)["csv"].is_string()) {
      return Reply::error(400, "BAD_REQUEST", "expected {\"csv\": \"...\"}");
    }
    csv = (*j)["csv"].get<std::string>();
    name = j->value("name", name);
  }
  std::shared_ptr<const Dataset> dataset;
  try {
    dataset = std::make_shared<const Dataset>(Dataset::parse_csv(csv, name));
  } catch (const Error& e) {
    return Reply::error(400, "BAD_CSV", e.what());
  }
  auto id = register_dataset(dataset);
  if (!options_.data_dir.empty()) {
    write_file_atomically(fs::path(options_.data_dir) / "datasets" / (id + ".csv"), csv);
  }
  return Reply::json({{"dataset_id", id},
                      {"name", dataset->name()},
                      {"rows", dataset->rows().size()},
                      {"columns", columns_json(*dataset)}},
                     201);
}

Reply Service::create_session(std::string_view body) {
  auto j = parse_body(body);
  if (!j || !j->contains("dataset_id") || !(*j)["dataset_id"].is_string()) {
    return Reply::error(400, "BAD_REQUEST", "expected {\"dataset_id\": \"...\"}");
  }
  const auto dataset_id = (*j)["dataset_id"].get<std::string>();
  auto dataset = find_dataset(dataset_id);
  if (!dataset) return Reply::error(404, "UNKNOWN_DATASET", "no dataset '" + dataset_id + "'");
  auto slot = std::make_shared<Slot>();
  slot->dataset_id = dataset_id;
  try {
    if (j->contains("history")) {
      slot->workspace = std::make_unique<Workspace>(dataset, Session::replay(dataset, (*j)["history"]));
    } else {
      slot->workspace = std::make_unique<Workspace>(dataset);
    }
  } catch (const std::exception& e) {
    return Reply::error(400, "BAD_REQUEST", std::string("history does not replay: ") + e.what());
  }
  const auto& session = slot->workspace->session();
  json out{{"dataset_id", dataset_id},
           {"chart_id", session.active_chart().id},
           {"version", session.version()},
           {"columns", columns_json(*dataset)},
           {"spec", session.export_spec(session.active_chart().id)}};
  out["session_id"] = register_session(std::move(slot));
  return Reply::json(out, 201);
}

Reply Service::post_utterance(const std::string& session_id, std::string_view body) {
  auto slot = find_session(session_id);
  if (!slot) return Reply::error(404, "UNKNOWN_SESSION", "no session '" + session_id + "'");
  auto j = parse_body(body);
  if (!j || !j->contains("text") || !(*j)["text"].is_string()) {
    return Reply::error(400, "BAD_REQUEST", "expected {\"text\": \"...\"}");
  }
  const auto text = (*j)["text"].get<std::string>();
  if (trim(text).empty()) return Reply::error(422, "PARSE_EMPTY", "the utterance is empty");

  std::lock_guard guard(slot->lock);
  auto& ws = *slot->workspace;
  auto parse = ws.parser().parse(text);
  json out{{"session_id", session_id}, {"utterance", text}, {"trace", parse.highlights()}};
  if (parse.sequence.actions.empty()) {
    out["error"] = {{"code", "PARSE_EMPTY"}, {"message", "no editing action recognized"}};
    out["parse"] = parse.to_json();
    return Reply::json(out, 422);
  }
  auto outcome = ws.session().execute(parse.sequence.actions, text);
  json actions = json::array(), statuses = json::array();
  bool all_unsupported = true;
  for (const auto& r : outcome.results) {
    actions.push_back(serialize_action(r.action));
    statuses.push_back(to_string(r.status));
    all_unsupported = all_unsupported && r.status == Status::kUnsupported;
  }
  const auto& chart = ws.session().active_chart();
  out["actions"] = actions;
  out["statuses"] = statuses;
  out["outcome"] = outcome.to_json();
  out["version"] = outcome.spec_version;
  out["chart_id"] = chart.id;
  out["parse"] = parse.to_json();
  out["spec"] = ws.session().export_spec(chart.id);
  if (all_unsupported) {
    out["error"] = {{"code", "UNSUPPORTED_OP"}, {"message", "no action in the utterance is supported"}};
    return Reply::json(out, 422);
  }
  return Reply::json(out);
}

Reply Service::chart_spec(const std::string& session_id, const std::string& chart_id) const {
  auto slot = find_session(session_id);
  if (!slot) return Reply::error(404, "UNKNOWN_SESSION", "no session '" + session_id + "'");
  std::lock_guard guard(slot->lock);
  try {
    return {200, slot->workspace->session().export_spec_text(chart_id)};
  } catch (const Error& e) {
    return Reply::error(404, "UNKNOWN_CHART", e.what());
  }
}

Reply Service::history(const std::string& session_id) const {
  auto slot = find_session(session_id);
  if (!slot) return Reply::error(404, "UNKNOWN_SESSION", "no session '" + session_id + "'");
  std::lock_guard guard(slot->lock);
  auto doc = slot->workspace->session().history_json();
  doc["dataset_id"] = slot->dataset_id;
  return Reply::json(doc);
}

Reply Service::suggest(std::string_view prefix, std::size_t k) const {
  json list = json::array();
  for (const auto& s : phrases_.suggest(prefix, k)) list.push_back({{"phrase", s.phrase}, {"frequency", s.frequency}});
  return Reply::json({{"prefix", prefix}, {"suggestions", list}});
}

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.text, kJson);
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/datasets", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, create_dataset(req.body, req.get_header_value("Content-Type")));
  });
  server.Post("/sessions", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, create_session(req.body));
  });
  server.Post(R"(/sessions/([^/]+)/utterances)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_utterance(req.matches[1], req.body));
  });
  server.Get(R"(/sessions/([^/]+)/charts/([^/]+)/spec)",
             [this, send](const httplib::Request& req, httplib::Response& res) {
               send(res, chart_spec(req.matches[1], req.matches[2]));
             });
  server.Get(R"(/sessions/([^/]+)/history)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, history(req.matches[1]));
  });
  server.Get("/suggest", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::size_t k = options_.suggest_limit;
    if (req.has_param("k")) {
      try {
        k = std::stoul(req.get_param_value("k"));
      } catch (const std::exception&) {
        return send(res, Reply::error(400, "BAD_REQUEST", "k must be a non-negative integer"));
      }
    }
    send(res, suggest(req.get_param_value("prefix"), k));
  });
  server.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) send(res, Reply::error(404, "NOT_FOUND", "no such endpoint"));
  });
  server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, Reply::error(500, "INTERNAL", what));
  });
}

}  // namespace nlchart
