#include "nestlab/cli.hpp"

int main(int argc, char** argv) { return nestlab::run_cli(argc, argv); }
