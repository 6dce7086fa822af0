#include "rfsad/cli.hpp"

int main(int argc, char** argv) { return rfsad::cli::run(argc, argv); }
