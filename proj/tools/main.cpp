#include "vocovar/cli.hpp"

int main(int argc, char** argv) { return vocovar::run_cli(argc, argv); }
