#include "aapl/harness/cli.hpp"

int main(int argc, char** argv) { return aapl::harness::run_cli(argc, argv); }
