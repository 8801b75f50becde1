#include "anisofrac/cli.hpp"

int main(int argc, char** argv) { return anisofrac::cli::run(argc, argv); }
