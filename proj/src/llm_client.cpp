#include "tqk/llm_client.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace tqk {

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::optional<LlmEndpoint> endpoint_from_env() {
  auto url = env("TQK_LLM_BASE_URL");
  auto key = env("TQK_LLM_API_KEY");
  if (!url || !key) return std::nullopt;
  LlmEndpoint ep;
  ep.base_url = *url;
  ep.api_key = *key;
  if (auto model = env("TQK_LLM_MODEL")) ep.model = *model;
  return ep;
}

void LlmClient::Slots::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void LlmClient::Slots::release() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

LlmClient::LlmClient(LlmEndpoint endpoint)
    : endpoint_(std::move(endpoint)), slots_(std::make_shared<Slots>(endpoint_.max_in_flight)) {
  const std::string& url = endpoint_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw LlmError(LlmError::Kind::kConfig, "base URL needs a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/chat/completions";
}

Completion LlmClient::complete(std::string_view prompt) {
  struct SlotGuard {
    Slots& s;
    explicit SlotGuard(Slots& slots) : s(slots) { s.acquire(); }
    ~SlotGuard() { s.release(); }
  } guard(*slots_);

  nlohmann::json body = {
      {"model", endpoint_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", endpoint_.temperature},
  };
  const std::string payload = body.dump();
  httplib::Headers headers = {{"Authorization", "Bearer " + endpoint_.api_key}};

  httplib::Client client(scheme_host_port_);
  const auto secs = endpoint_.timeout.count() / 1000;
  const auto usecs = (endpoint_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  std::string last_failure;
  bool last_was_timeout = false;
  for (int attempt = 0;; ++attempt) {
    auto res = client.Post(path_, headers, payload, "application/json");
    if (res) {
      const int status = res->status;
      if (status == 401 || status == 403) {
        throw LlmError(LlmError::Kind::kAuth, "endpoint rejected credentials (HTTP " +
                                                  std::to_string(status) + ")",
                       attempt);
      }
      if (status >= 200 && status < 300) {
        auto j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
            j["choices"].empty()) {
          throw LlmError(LlmError::Kind::kMalformed, "malformed response body", attempt);
        }
        const auto& choice = j["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string()) {
          return {choice["message"]["content"].get<std::string>(), attempt};
        }
        if (choice.contains("text") && choice["text"].is_string()) {
          return {choice["text"].get<std::string>(), attempt};
        }
        throw LlmError(LlmError::Kind::kMalformed, "malformed response body: no message content",
                       attempt);
      }
      if (!transient_status(status)) {
        throw LlmError(LlmError::Kind::kHttp, "HTTP " + std::to_string(status) + ": " + res->body,
                       attempt);
      }
      last_failure = "HTTP " + std::to_string(status);
      last_was_timeout = status == 408;
    } else {
      auto err = res.error();
      last_failure = httplib::to_string(err);
      last_was_timeout = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
    }

    if (attempt >= endpoint_.max_retries) {
      const std::string detail = " after " + std::to_string(attempt) + " retries (" + last_failure + ")";
      if (last_was_timeout) throw LlmError(LlmError::Kind::kTimeout, "timeout" + detail, attempt);
      throw LlmError(LlmError::Kind::kTransient, "request failed" + detail, attempt);
    }
    auto delay = std::chrono::duration<double, std::milli>(endpoint_.initial_backoff.count() *
                                                           std::pow(endpoint_.backoff_factor, attempt));
    std::this_thread::sleep_for(delay);
  }
}

}  // namespace tqk
