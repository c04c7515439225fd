#include "tdhorde/cli.hpp"

int main(int argc, char** argv) { return tdhorde::run_main(argc, argv); }
