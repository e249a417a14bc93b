#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mwsmpc::cli::dispatch(argc, argv, std::cout, std::cerr); }
