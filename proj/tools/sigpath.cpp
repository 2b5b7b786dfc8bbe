#include "sigpath_cli.hpp"

int main(int argc, char** argv) { return sigpath::cli::sigpath_main(argc, argv); }
