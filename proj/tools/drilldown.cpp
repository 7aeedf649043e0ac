#include "drilldown/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return drilldown::run_cli(argc, argv, std::cout, std::cerr); }
