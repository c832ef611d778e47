#pragma once

#include "mcfr/llm_client.hpp"
#include "mcfr/qa.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace mcfr {

enum ExitStatus : int {
    exit_ok = 0,               // verdict produced
    exit_expectation = 1,      // verdict differs from --expect
    exit_usage = 2,            // bad command line
    exit_input = 3,            // unreadable or invalid model, query or dataset
    exit_resource_limit = 4,   // exploration stopped before a verdict
    exit_translator = 5,       // translation or llm transport failure
};

struct CliStreams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

struct CliContext {
    Environment env;
    // Overrides the HTTP transport of the llm translator.
    std::shared_ptr<LlmTransport> transport;
    bool interactive = false; // show a prompt in the repl
};

// `args` excludes the program name. Results go to `out`, diagnostics to `err`.
//
//   validate <model.mcm> [--render]                             0, 3
//   check <model.mcm> --query Q [--trace] [--format text|structured]
//         [--expect yes|no] [--max-states N] [--max-depth N]
//         [--threads N] [--time-budget S] [--aliases F]          0, 1, 3, 4
//   ask <model.mcm> --question T [--translator template|spec|llm]
//       [--facts F] [--dataset F --id I] [--aliases F] [--templates F]
//       [--transcript F] [--max-retries N]                       0, 3, 4, 5
//   bench <model.mcm> <dataset.json> [--aliases F]
//         [--translator spec|template|llm] [--report F]
//         [--format text|structured] [--jobs N]                  0, 3, 5
//   repl <model.mcm> [--translator ...]                          0, 3
[[nodiscard]] int run_cli(const std::vector<std::string>& args, const CliContext& ctx, const CliStreams& io);

} // namespace mcfr
