#include "spdesign/cli.hpp"

int main(int argc, char** argv) { return spd::run_cli(argc, argv); }
