#pragma once

#include <atomic>
#include <ostream>
#include <string>
#include <vector>

namespace asmb {

// args excludes the program name. Diagnostics go to `err` as one JSON object
// per line; the exit code is 0 iff none was an error record.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Set by signal handlers to end `serve`.
std::atomic<bool>& cli_stop_flag();

} // namespace asmb
