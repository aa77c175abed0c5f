#include "occupancy/cli.hpp"

int main(int argc, char** argv) { return occupancy::cli_main(argc, argv); }
