#include <vector>

#include "projseg/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return projseg::cli::run_cli(args);
}
