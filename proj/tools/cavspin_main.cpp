#include <iostream>
#include <string>
#include <vector>

#include "cavspin/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return cavspin::cli::dispatch(args, std::cout, std::cerr);
}
