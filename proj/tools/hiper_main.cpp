#include <iostream>

#include "hiper/cli/dispatch.hpp"

int main(int argc, char** argv) { return hiper::dispatch(argc, argv, std::cout, std::cerr); }
