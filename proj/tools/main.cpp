#include "conical/cli.hpp"

int main(int argc, char** argv) { return conical::cli::run(argc, argv); }
