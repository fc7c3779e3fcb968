#include "trinmf/cli.hpp"

int main(int argc, char** argv) { return trinmf::cli::run(argc, argv); }
