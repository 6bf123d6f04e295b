#include "ffvos/cli.hpp"

int main(int argc, char** argv) { return ffvos::cli::main(argc, argv); }
