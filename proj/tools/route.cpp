#include "route/cli.hpp"

int main(int argc, char** argv) { return route::run_cli(argc, argv); }
