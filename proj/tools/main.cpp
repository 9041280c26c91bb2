#include "cli.hpp"

int main(int argc, char** argv) { return kld::cli::run(argc, argv); }
