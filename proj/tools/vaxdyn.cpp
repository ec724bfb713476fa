#include "vaxdyn/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return vaxdyn::run_cli(argc, argv, std::cout, std::cerr);
}
