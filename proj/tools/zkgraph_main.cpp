#include "zkgraph/cli.hpp"

int main(int argc, char** argv) { return zkgraph::run_cli(argc, argv); }
