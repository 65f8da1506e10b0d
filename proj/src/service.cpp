#include "tqk/service.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "tqk/error.hpp"
#include "tqk/linearize.hpp"
#include "tqk/numeric.hpp"
#include "tqk/reasoner.hpp"
#include "tqk/retrieval.hpp"

namespace fs = std::filesystem;

namespace tqk {

namespace {

std::optional<std::uint64_t> id_number(const std::string& id) {
  if (id.size() < 2 || id[0] != 't') return std::nullopt;
  std::uint64_t n = 0;
  for (std::size_t i = 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return std::nullopt;
    n = n * 10 + static_cast<std::uint64_t>(id[i] - '0');
  }
  return n;
}

Json stored_to_json(const StoredTable& t, bool with_table) {
  Json j = {{"id", t.id},
            {"name", t.name},
            {"uploaded_at", t.uploaded_at},
            {"rows", t.table.rows()},
            {"cols", t.table.cols()},
            {"header_rows", t.table.header_rows()}};
  if (with_table) j["table"] = to_json(t.table);
  return j;
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::string& stage = {}) {
  Json j = {{"error", message}};
  if (!stage.empty()) j["stage"] = stage;
  send_json(res, status, j);
}

char delimiter_for(const httplib::Request& req, const std::string& filename) {
  if (req.has_param("delimiter")) {
    const std::string d = req.get_param_value("delimiter");
    if (d == "tab" || d == "\t" || d == "\\t") return '\t';
    if (d == "comma") return ',';
    if (d == "semicolon") return ';';
    if (d.size() == 1) return d[0];
    throw Error("unsupported delimiter '" + d + "'");
  }
  const auto ext = to_lower(fs::path(filename).extension().string());
  return ext == ".tsv" || ext == ".tab" ? '\t' : ',';
}

bool flag_param(const httplib::Request& req, const std::string& key, bool fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = to_lower(req.get_param_value(key));
  return !(v == "0" || v == "false" || v == "no");
}

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

// TableStore ---------------------------------------------------------------

TableStore::TableStore(std::string dir) : dir_(std::move(dir)) {
  if (dir_.empty()) return;
  fs::create_directories(dir_);
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    auto n = id_number(entry.path().stem().string());
    if (!n) continue;
    Json j = Json::parse(read_file(entry.path().string()), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    try {
      StoredTable t;
      t.id = entry.path().stem().string();
      t.name = j.value("name", t.id);
      t.uploaded_at = j.value("uploaded_at", std::int64_t{0});
      t.table = table_from_json(j.at("table"));
      tables_[*n] = std::move(t);
    } catch (const std::exception&) {
      continue;  // unreadable entry, left on disk untouched
    }
    next_ = std::max(next_, *n + 1);
  }
}

std::string TableStore::path_for(const std::string& id) const {
  return (fs::path(dir_) / (id + ".json")).string();
}

StoredTable TableStore::add(const UnifiedTable& table, std::string name) {
  std::unique_lock lock(mu_);
  const std::uint64_t n = next_++;
  StoredTable t;
  t.id = "t" + std::to_string(n);
  t.name = std::move(name);
  t.uploaded_at = now_seconds();
  t.table = UnifiedTable(t.id, table.cells(), table.header_rows(), table.merged_regions(),
                         table.caption());
  if (!dir_.empty()) {
    Json j = {{"name", t.name}, {"uploaded_at", t.uploaded_at}, {"table", to_json(t.table)}};
    const std::string path = path_for(t.id);
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw Error("cannot write " + tmp);
      out << j.dump();
    }
    fs::rename(tmp, path);
  }
  tables_[n] = t;
  return t;
}

std::optional<StoredTable> TableStore::get(const std::string& id) const {
  auto n = id_number(id);
  if (!n) return std::nullopt;
  std::shared_lock lock(mu_);
  auto it = tables_.find(*n);
  if (it == tables_.end()) return std::nullopt;
  return it->second;
}

bool TableStore::remove(const std::string& id) {
  auto n = id_number(id);
  if (!n) return false;
  std::unique_lock lock(mu_);
  auto it = tables_.find(*n);
  if (it == tables_.end()) return false;
  if (!dir_.empty()) {
    std::error_code ec;
    fs::remove(path_for(id), ec);
  }
  tables_.erase(it);
  return true;
}

std::vector<StoredTable> TableStore::list() const {
  std::shared_lock lock(mu_);
  std::vector<StoredTable> out;
  out.reserve(tables_.size());
  for (const auto& [n, t] : tables_) out.push_back(t);
  return out;
}

DatasetMap load_dataset_config(const std::string& path) {
  Json j = Json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("datasets") || !j["datasets"].is_object()) {
    throw Error(path + ": expected {\"datasets\": {name: {split: path}}}");
  }
  const fs::path base = fs::path(path).parent_path();
  DatasetMap out;
  for (const auto& [name, splits] : j["datasets"].items()) {
    if (!splits.is_object()) throw Error(path + ": dataset " + name + " must map splits to paths");
    for (const auto& [split, file] : splits.items()) {
      if (!file.is_string()) throw Error(path + ": " + name + "/" + split + " must be a path");
      fs::path p = file.get<std::string>();
      if (p.is_relative()) p = base / p;
      out[name][split] = load_unified(p.string());
    }
  }
  return out;
}

// Service ------------------------------------------------------------------

struct Service::Impl {
  httplib::Server server;
  std::thread thread;
};

Service::Service(ServiceOptions options)
    : options_(std::move(options)), store_(options_.table_dir), impl_(std::make_unique<Impl>()) {
  completer_ = options_.completer;
  if (!completer_ && options_.endpoint) completer_ = std::make_shared<LlmClient>(*options_.endpoint);
  mount(impl_->server);
}

Service::~Service() { stop(); }

void Service::mount(httplib::Server& server) {
  const std::string origin = options_.cors_origin;
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
  });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "internal error");
    }
  });

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  server.Get("/datasets", [this](const httplib::Request&, httplib::Response& res) {
    Json list = Json::array();
    for (const auto& [name, splits] : options_.datasets) {
      Json s = Json::array();
      for (const auto& [split, examples] : splits) s.push_back({{"split", split}, {"count", examples.size()}});
      list.push_back({{"name", name}, {"splits", s}});
    }
    send_json(res, 200, list);
  });

  server.Get(R"(/datasets/([^/]+)/([^/]+)/([^/]+))", [this](const httplib::Request& req,
                                                            httplib::Response& res) {
    const std::string name = req.matches[1], split = req.matches[2], index = req.matches[3];
    auto d = options_.datasets.find(name);
    if (d == options_.datasets.end()) return send_error(res, 404, "unknown dataset " + name);
    auto s = d->second.find(split);
    if (s == d->second.end()) return send_error(res, 404, "unknown split " + name + "/" + split);
    const auto& examples = s->second;
    std::size_t i = 0;
    try {
      std::size_t used = 0;
      i = std::stoul(index, &used);
      if (used != index.size()) throw std::invalid_argument(index);
    } catch (const std::exception&) {
      return send_error(res, 400, "index must be a non-negative integer");
    }
    if (i >= examples.size()) {
      return send_error(res, 404,
                        examples.empty() ? "split is empty"
                                         : "valid range 0.." + std::to_string(examples.size() - 1));
    }
    send_json(res, 200, to_json(examples[i]));
  });

  server.Post("/tables", [this](const httplib::Request& req, httplib::Response& res) {
    std::string body, filename;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) return send_error(res, 400, "multipart upload needs a 'file' field");
      auto f = req.get_file_value("file");
      body = f.content;
      filename = f.filename;
    } else {
      body = req.body;
      filename = req.get_param_value("filename");
    }
    std::string name = req.has_param("name") ? req.get_param_value("name") : filename;
    if (name.empty()) name = "table";
    try {
      const char delim = delimiter_for(req, filename);
      UnifiedTable t = table_from_delimited(body, delim, flag_param(req, "has_header", true));
      if (t.rows() == 0 || t.cols() == 0) return send_error(res, 400, "empty table");
      StoredTable stored = store_.add(t, name);
      send_json(res, 201, stored_to_json(stored, false));
    } catch (const Error& e) {
      send_error(res, 400, e.what());
    }
  });

  server.Get("/tables", [this](const httplib::Request&, httplib::Response& res) {
    Json list = Json::array();
    for (const auto& t : store_.list()) list.push_back(stored_to_json(t, false));
    send_json(res, 200, list);
  });

  server.Get(R"(/tables/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto t = store_.get(req.matches[1]);
    if (!t) return send_error(res, 404, "unknown table " + std::string(req.matches[1]));
    send_json(res, 200, stored_to_json(*t, true));
  });

  server.Delete(R"(/tables/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!store_.remove(id)) return send_error(res, 404, "unknown table " + id);
    send_json(res, 200, {{"deleted", id}});
  });

  server.Get(R"(/tables/([^/]+)/download)", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
    const std::string id = req.matches[1];
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "csv";
    if (format != "csv" && format != "tsv" && format != "md" && format != "json") {
      return send_error(res, 400, "unknown format '" + format + "' (valid: csv, tsv, md, json)");
    }
    auto t = store_.get(id);
    if (!t) return send_error(res, 404, "unknown table " + id);
    std::string body, type;
    if (format == "csv") {
      body = write_delimited(t->table, ',');
      type = "text/csv";
    } else if (format == "tsv") {
      body = write_delimited(t->table, '\t');
      type = "text/tab-separated-values";
    } else if (format == "md") {
      body = to_markdown(t->table);
      type = "text/markdown";
    } else {
      body = to_json(t->table).dump();
      type = "application/json";
    }
    res.set_header("Content-Disposition", "attachment; filename=\"" + id + "." + format + "\"");
    res.status = 200;
    res.set_content(body, type);
  });

  server.Post("/ask", [this](const httplib::Request& req, httplib::Response& res) {
    const auto t0 = std::chrono::steady_clock::now();
    Json body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) return send_error(res, 400, "body must be a JSON object");

    QAExample ex;
    std::vector<QAExample> shot_pool;
    const Json& src = body.contains("source") ? body["source"] : Json();
    std::string table_id;
    if (src.is_string()) {
      table_id = src.get<std::string>();
    } else if (src.is_object() && src.contains("table_id") && src["table_id"].is_string()) {
      table_id = src["table_id"].get<std::string>();
    }
    if (!table_id.empty()) {
      auto t = store_.get(table_id);
      if (!t) return send_error(res, 400, "unknown source: table " + table_id);
      ex.id = t->id;
      ex.dataset = "upload";
      ex.table = t->table;
    } else if (src.is_object() && src.contains("dataset")) {
      const std::string name = src.value("dataset", "");
      const std::string split = src.value("split", "");
      const auto index = src.value("index", std::size_t{0});
      auto d = options_.datasets.find(name);
      if (d == options_.datasets.end() || !d->second.count(split) ||
          index >= d->second.at(split).size()) {
        return send_error(res, 400, "unknown source: " + name + "/" + split + "/" + std::to_string(index));
      }
      ex = d->second.at(split)[index];
      if (auto train = d->second.find("train"); train != d->second.end()) shot_pool = train->second;
    } else {
      return send_error(res, 400, "unknown source: expected a table id or {dataset, split, index}");
    }
    if (body.contains("question") && body["question"].is_string()) ex.question = body["question"].get<std::string>();
    if (trim(ex.question).empty()) return send_error(res, 400, "question is required");

    PromptSpec spec;
    std::optional<RetrieverConfig> retriever;
    try {
      const Json spec_j = body.contains("spec") && body["spec"].is_object() ? body["spec"] : Json::object();
      if (spec_j.contains("input_format")) {
        auto f = input_format_from_string(spec_j["input_format"].get<std::string>());
        if (!f) throw Error("input_format must be markdown or flatten");
        spec.input_format = *f;
      }
      if (spec_j.contains("scheme")) {
        auto s = scheme_from_string(spec_j["scheme"].get<std::string>());
        if (!s) throw Error("scheme must be direct, cot or pot");
        spec.scheme = *s;
      }
      if (spec_j.contains("budget")) spec.budget.max_tokens = spec_j["budget"].get<std::size_t>();
      if (spec_j.contains("cot_marker")) spec.cot_marker = spec_j["cot_marker"].get<std::string>();
      const auto shots = spec_j.value("shots", std::size_t{0});
      for (const auto& s : shot_pool) {
        if (spec.shots.size() >= shots) break;
        if (s.id == ex.id) continue;
        if (spec.scheme == Scheme::kPoT && !s.answer.derivation) continue;
        spec.shots.push_back(s);
      }
      if (body.contains("retrieve") && body["retrieve"].is_object()) {
        const Json& r = body["retrieve"];
        RetrieverConfig cfg;
        if (r.contains("granularity")) {
          auto g = granularity_from_string(r["granularity"].get<std::string>());
          if (!g) throw Error("granularity must be row, column, cell or passage");
          cfg.granularity = *g;
        }
        cfg.top_k = r.value("top_k", cfg.top_k);
        cfg.k1 = r.value("k1", cfg.k1);
        cfg.b = r.value("b", cfg.b);
        cfg.include_passages = r.value("include_passages", cfg.include_passages);
        validate(cfg);
        retriever = cfg;
      }
    } catch (const std::exception& e) {
      return send_error(res, 400, e.what());
    }

    if (!completer_) return send_error(res, 502, "auth: endpoint not configured", "auth");
    try {
      AskResult r = answer_question(ex, spec, retriever, *completer_);
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      Json out = {{"answer", r.answer.value},
                  {"format", to_string(r.answer.format)},
                  {"prompt_id", r.prompt_id},
                  {"retries", r.retries},
                  {"flags", r.flags},
                  {"timing", {{"total_ms", ms}}}};
      if (r.answer.derivation) out["derivation"] = *r.answer.derivation;
      send_json(res, 200, out);
    } catch (const StageError& e) {
      const bool upstream = e.stage() == "llm" || e.stage() == "auth";
      send_error(res, upstream ? 502 : 422, e.what(), e.stage());
    } catch (const Error& e) {
      send_error(res, 400, e.what());
    }
  });
}

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::start_background(const std::string& host) {
  int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw Error("cannot bind " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tqk
