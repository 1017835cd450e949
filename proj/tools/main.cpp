#include "cli.hpp"

int main(int argc, char** argv) { return stereobench::cli::run(argc, argv); }
