#include "regime_ogarch/cli.hpp"

int main(int argc, char** argv) { return ogarch::cli_main(argc, argv); }
