#include "lded/cli.hpp"

int main(int argc, char** argv) { return lded::cli::run(argc, argv); }
