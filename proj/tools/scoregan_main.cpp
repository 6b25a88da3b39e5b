#include "scoregan/cli.hpp"

int main(int argc, char** argv) { return scoregan::run_cli(argc, argv); }
