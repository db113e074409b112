#include "cli.hpp"

int main(int argc, char** argv) { return latticevar::cli::run_cli(argc, argv); }
