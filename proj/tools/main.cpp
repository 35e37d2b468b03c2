#include "cli.hpp"

int main(int argc, char** argv) { return pqsched::cli::run_cli(argc, argv); }
