#include "gendernet/cli.hpp"

int main(int argc, char** argv) { return gendernet::run_cli(argc, argv); }
