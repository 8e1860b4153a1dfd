#include "wvtilt_cli.hpp"

int main(int argc, char** argv) { return wvtilt::cli::run(argc, argv); }
