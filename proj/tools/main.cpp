#include <csignal>
#include <iostream>

#include "asmb/cli.hpp"

namespace {

extern "C" void on_signal(int) { asmb::cli_stop_flag().store(true); }

} // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::vector<std::string> args(argv + 1, argv + argc);
    return asmb::cli_main(args, std::cout, std::cerr);
}
