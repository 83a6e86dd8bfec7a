#include "xover/cli.h"

int main(int argc, char** argv) { return xover::RunCli(argc, argv); }
