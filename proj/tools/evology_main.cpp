#include "evology/cli.hpp"

int main(int argc, char** argv) { return evology::run_cli(argc, argv); }
