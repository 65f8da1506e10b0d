#include "tqk/cli.hpp"

int main(int argc, char** argv) { return tqk::cli::run(argc, argv); }
