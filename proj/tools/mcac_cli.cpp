#include <mcac/cli.hpp>

int main(int argc, char** argv) { return mcac::cli_main(argc, argv); }
