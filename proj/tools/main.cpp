#include "mg1/cli.hpp"

int main(int argc, char** argv) { return mg1::cli_main(argc, argv); }
