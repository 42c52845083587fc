#include "evac/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return evac::run_cli(argc, argv, std::cout, std::cerr);
}
