#include "lemur/cli.hpp"

int main(int argc, char** argv) { return lemur::run_cli(argc, argv); }
