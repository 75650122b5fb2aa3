#include "bplan/cli.hpp"

int main(int argc, char** argv) { return bplan::cli::dispatch(argc, argv); }
