#include "latc/cli.hpp"

int main(int argc, char** argv) { return latc::run_cli(argc, argv); }
