#include "cli.hpp"

int main(int argc, char** argv) { return vsnit::cli::run(argc, argv); }
