#include "cli.hpp"

int main(int argc, char** argv) { return jpa::cli::run(argc, argv); }
