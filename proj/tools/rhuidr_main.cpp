#include "rhuidr/cli.hpp"

int main(int argc, char** argv) { return rhuidr::cli_main(argc, argv); }
