#include "switchwalk/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return switchwalk::cli::run(argc, argv, std::cout, std::cerr);
}
