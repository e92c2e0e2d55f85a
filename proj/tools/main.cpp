#include "cli.hpp"

int main(int argc, char** argv) { return mvcolor::cli::run_cli(argc, argv); }
