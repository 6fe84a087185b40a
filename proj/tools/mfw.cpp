#include "mfw/cli/run.hpp"

int main(int argc, char** argv) { return mfw::cli::run_cli(argc, argv); }
