#include <string>
#include <vector>

#include "retok/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return retok::run_command(args);
}
