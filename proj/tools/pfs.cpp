#include <iostream>

#include "pfs_cli.hpp"

int main(int argc, char** argv) { return pfs::cli::run(argc, argv, std::cout, std::cerr); }
