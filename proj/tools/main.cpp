#include "nhknot/cli.hpp"

int main(int argc, char** argv) { return nhknot::run_cli(argc, argv); }
