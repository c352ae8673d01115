#include "graphsamp/cli.hpp"

int main(int argc, char** argv) { return graphsamp::cli::parse_and_dispatch(argc, argv); }
