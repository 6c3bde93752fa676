#include "repure/cli.hpp"

int main(int argc, char** argv) { return repure::cli::run(argc, argv); }
