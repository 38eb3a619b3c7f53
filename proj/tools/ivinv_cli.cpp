#include "ivinv/cli.hpp"

int main(int argc, char** argv) { return ivinv::run_cli(argc, argv); }
