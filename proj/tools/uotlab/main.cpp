#include "cli.hpp"

int main(int argc, char** argv) { return uotlab::cli::cli_main(argc, argv); }
