#include "mafem/cli.hpp"

int main(int argc, char** argv) { return mafem::cli_main(argc, argv); }
