#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "tqk/llm_client.hpp"

namespace tqk::cli {

enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2 };

// Test seam: when set, `ask` uses this instead of an endpoint from the
// environment.
struct Hooks {
  std::shared_ptr<Completer> completer;
};

// argv[0] is the program name. Machine-readable results go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err,
        const Hooks& hooks = {});
int run(int argc, char** argv);

}  // namespace tqk::cli
