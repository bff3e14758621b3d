#include <iostream>

#include "slotfill/cli.hpp"

int main(int argc, char** argv) { return slotfill::run_cli(argc, argv, std::cout, std::cerr); }
