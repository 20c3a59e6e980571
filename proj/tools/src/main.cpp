#include "cli.hpp"

int main(int argc, char** argv) { return repgars::cli::cmd_dispatch(argc, argv); }
