#include <iostream>

#include "canonlift/app.hpp"

int main(int argc, char** argv) { return canonlift::run_cli(argc, argv, std::cout, std::cerr); }
