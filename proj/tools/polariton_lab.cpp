#include "polariton/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return polariton::cli::run(argc, argv, std::cout, std::cerr);
}
