#pragma once

#include <string>
#include <vector>

namespace puppetai {

// Exit codes: 0 success, 1 validation failure, 2 runtime fault.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);

// Bundled demo config; PUPPETAI_DATA_DIR overrides the data directory
// baked in at build time.
std::string default_config_path();

}  // namespace puppetai
