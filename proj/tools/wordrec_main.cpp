#include "wordrec/cli.hpp"

int main(int argc, char** argv) { return wordrec::run_cli(argc, argv); }
