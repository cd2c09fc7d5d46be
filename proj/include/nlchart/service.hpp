#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nlchart/pipeline.hpp"
#include "nlchart/suggest.hpp"

namespace httplib {
class Server;
}

namespace nlchart {

struct ServiceOptions {
  /// Uploaded CSVs and session snapshots live here; empty keeps everything
  /// in memory.
  std::string data_dir;
  std::size_t suggest_limit = 10;
};

/// One HTTP response. `text` holds pre-rendered JSON so spec documents pass
/// through byte for byte.
struct Reply {
  int status = 200;
  std::string text;

  static Reply json(const nlohmann::json& body, int status = 200);
  /// {"error": {"code": ..., "message": ...}}
  static Reply error(int status, std::string_view code, std::string_view message);
};

/// Sessions over uploaded datasets. Requests for different sessions run
/// concurrently; requests for one session are applied one at a time, in the
/// order they take the session lock.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();

  /// Body is raw CSV, or {"name", "csv"} when `content_type` is JSON.
  Reply create_dataset(std::string_view body, std::string_view content_type);
  /// Body {"dataset_id"} and an optional {"history"} log to replay.
  Reply create_session(std::string_view body);
  /// Body {"text"}.
  Reply post_utterance(const std::string& session_id, std::string_view body);
  Reply chart_spec(const std::string& session_id, const std::string& chart_id) const;
  Reply history(const std::string& session_id) const;
  Reply suggest(std::string_view prefix, std::size_t k) const;

  /// Routes the endpoints above onto `server`.
  void mount(httplib::Server& server);
  /// Writes every session's history under data_dir/sessions; no-op without
  /// a data directory.
  void snapshot() const;

  /// Id of the bundled car-sales dataset, always registered.
  static constexpr const char* kSampleDataset = "carsales";

 private:
  struct Slot {
    mutable std::mutex lock;
    std::string dataset_id;
    std::unique_ptr<Workspace> workspace;
  };

  std::shared_ptr<Slot> find_session(const std::string& id) const;
  std::shared_ptr<const Dataset> find_dataset(const std::string& id) const;
  std::string register_dataset(std::shared_ptr<const Dataset> dataset, std::string id = {});
  std::string register_session(std::shared_ptr<Slot> slot, std::string id = {});
  void restore();

  ServiceOptions options_;
  const SuggestionIndex& phrases_;
  mutable std::shared_mutex registry_;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::size_t next_dataset_ = 1;
  std::size_t next_session_ = 1;
};

}  // namespace nlchart
