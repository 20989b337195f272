#include "tdiff/cli.hpp"

int main(int argc, char** argv) { return tdiff::cli::main(argc, argv); }
