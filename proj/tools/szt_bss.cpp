#include "sztbss/cli.hpp"

int main(int argc, char** argv) { return sztbss::cli::cli_main(argc, argv); }
