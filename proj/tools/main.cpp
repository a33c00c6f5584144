#include "thoughtmem/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return thoughtmem::cli_dispatch(argc, argv, std::cout, std::cerr);
}
