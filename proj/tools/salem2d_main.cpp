#include <iostream>
#include <string>
#include <vector>

#include "salem2d/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return salem2d::dispatch(args, std::cout, std::cerr);
}
