#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "tqk/error.hpp"

namespace tqk {

struct LlmEndpoint {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model = "gpt-3.5-turbo";
  std::string api_key;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  std::size_t max_in_flight = 4;
};

// TQK_LLM_BASE_URL, TQK_LLM_API_KEY, TQK_LLM_MODEL. nullopt unless both the
// base URL and the key are set.
std::optional<LlmEndpoint> endpoint_from_env();

class LlmError : public Error {
 public:
  enum class Kind { kAuth, kTimeout, kTransient, kHttp, kMalformed, kConfig };
  LlmError(Kind kind, const std::string& what, int retries = 0)
      : Error(what), kind_(kind), retries_(retries) {}
  Kind kind() const { return kind_; }
  int retries() const { return retries_; }

 private:
  Kind kind_;
  int retries_;
};

struct Completion {
  std::string text;
  int retries = 0;
};

// Anything that turns a prompt into model text.
class Completer {
 public:
  virtual ~Completer() = default;
  virtual Completion complete(std::string_view prompt) = 0;
};

// Chat-completions client ({model, messages: [{role, content}], temperature}
// posted to <base_url>/chat/completions). Retries connection failures, 408,
// 429 and 5xx with exponential backoff; 401/403 fail at once. At most
// max_in_flight requests run concurrently per client.
class LlmClient : public Completer {
 public:
  explicit LlmClient(LlmEndpoint endpoint);
  Completion complete(std::string_view prompt) override;
  const LlmEndpoint& endpoint() const { return endpoint_; }

 private:
  class Slots {
   public:
    explicit Slots(std::size_t n) : free_(n == 0 ? 1 : n) {}
    void acquire();
    void release();

   private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t free_;
  };

  LlmEndpoint endpoint_;
  std::string scheme_host_port_;
  std::string path_;
  std::shared_ptr<Slots> slots_;
};

}  // namespace tqk
