#include <scprop/cli.hpp>

int main(int argc, char** argv) { return scprop::run_cli(argc, argv); }
