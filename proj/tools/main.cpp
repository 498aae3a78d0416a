#include <annulus/cli.hpp>

int main(int argc, char** argv) { return annulus::run_cli(argc, argv); }
