#include "semitoric/cli.hpp"

int main(int argc, char** argv) { return semitoric::cli_main(argc, argv); }
