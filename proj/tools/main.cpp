#include "barron/cli.hpp"

int main(int argc, char** argv) { return barron::cli::run(argc, argv); }
