#pragma once

#include <string>

namespace rost::cli {

/// Exit codes: 0 ok, 1 check failure, 2 spec parse failure, 3 validation
/// rejection (D.1/D.2), 4 domain too narrow.
int run(int argc, const char* const* argv);

int run_command(const std::string& command, const std::string& spec_path,
                const std::string& out_dir, bool quiet);

}  // namespace rost::cli
