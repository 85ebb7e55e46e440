#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include "biharm/cli.hpp"

namespace {
extern "C" void on_sigint(int) { biharm::cancel_flag().store(true); }
} // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_sigint);
    std::vector<std::string> args(argv + 1, argv + argc);
    const int code = biharm::run_cli(args, std::cout, std::cerr);
    if (biharm::cancel_flag().load()) return biharm::kExitPartial;
    return code;
}
