#include "spectra/cli.hpp"

#include <iostream>

int main(int argc, char **argv)
{
    return spectra::run_cli(argc, argv, std::cout, std::cerr);
}
