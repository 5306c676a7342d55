#include "factorscope/commands.hpp"

int main(int argc, char** argv) { return factorscope::run_cli(argc, argv); }
