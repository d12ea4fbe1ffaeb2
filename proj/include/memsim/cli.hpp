#pragma once

#include <string>
#include <vector>

namespace memsim::shell {

// Entry point behind the memsim binary. Exit codes: 0 success, 2 validation
// error, 3 numerical failure, 64 usage error / unknown subcommand.
int run(const std::vector<std::string>& args);

}  // namespace memsim::shell
