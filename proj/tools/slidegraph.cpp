#include "slidegraph/cli.hpp"

int main(int argc, char** argv) { return slidegraph::run_cli(argc, argv); }
