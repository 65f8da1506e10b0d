#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tqk/ingest.hpp"
#include "tqk/llm_client.hpp"
#include "tqk/table.hpp"

namespace httplib {
class Server;
}

namespace tqk {

struct StoredTable {
  std::string id;
  std::string name;
  std::int64_t uploaded_at = 0;  // unix seconds
  UnifiedTable table;
};

// Uploaded tables, one JSON file per table under `dir` (no persistence when
// dir is empty). Readers share a lock; add and remove take it exclusively.
class TableStore {
 public:
  explicit TableStore(std::string dir = {});

  // Assigns a fresh id ("t1", "t2", ...), never reusing one seen on disk.
  StoredTable add(const UnifiedTable& table, std::string name);
  std::optional<StoredTable> get(const std::string& id) const;
  bool remove(const std::string& id);
  std::vector<StoredTable> list() const;  // by id order of creation

 private:
  std::string path_for(const std::string& id) const;

  std::string dir_;
  mutable std::shared_mutex mu_;
  std::map<std::uint64_t, StoredTable> tables_;
  std::uint64_t next_ = 1;
};

// name -> split -> examples
using DatasetMap = std::map<std::string, std::map<std::string, std::vector<QAExample>>>;

// {"datasets": {"demo": {"dev": "demo_dev.jsonl", ...}}}; relative paths
// resolve against the config file's directory.
DatasetMap load_dataset_config(const std::string& path);

struct ServiceOptions {
  std::string table_dir;
  DatasetMap datasets;
  // Completer used by /ask; when unset an LlmClient is built from `endpoint`.
  std::shared_ptr<Completer> completer;
  std::optional<LlmEndpoint> endpoint;
  std::string cors_origin = "*";
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  // Registers every route on `server`.
  void mount(httplib::Server& server);

  // Blocking; returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port on host and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

  TableStore& tables() { return store_; }

 private:
  struct Impl;
  ServiceOptions options_;
  TableStore store_;
  std::shared_ptr<Completer> completer_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tqk
