#pragma once

#include <string>
#include <vector>

namespace gendernet {

// Entry point behind the gendernet binary. Exit codes: 0 success, 1 usage
// error, 2 data/model error. Errors are written to stderr prefixed "error:".
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace gendernet
