#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace toeplab::cli {

// Exit status: 0 success, 1 runtime error, 2 manifest error, 3 guard violation.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace toeplab::cli
