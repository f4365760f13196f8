#include "membrane/cli.hpp"

int main(int argc, char** argv) { return membrane::run_main(argc, argv); }
