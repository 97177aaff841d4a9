#include "tscope/cli.hpp"

int main(int argc, char** argv) { return tscope::cli::run(argc, argv); }
