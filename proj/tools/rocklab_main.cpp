#include "rocklab/cli.hpp"

int main(int argc, char** argv) { return rocklab::run_cli(argc, argv); }
