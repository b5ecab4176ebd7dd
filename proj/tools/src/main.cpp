#include "cli.hpp"

int main(int argc, char** argv) { return radsearch::cli::run(argc, argv); }
