#include "rost/cli.hpp"

int main(int argc, char** argv) { return rost::cli::run(argc, argv); }
