#include <iostream>

#include "dqa/app.hpp"

int main(int argc, char** argv) { return dqa::run(argc, argv, std::cout, std::cerr); }
