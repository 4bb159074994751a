#include "cli/commands.hpp"

int main(int argc, char** argv) { return mdl::cli::run_cli(argc, argv); }
