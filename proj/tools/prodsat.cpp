#include "prodsat/cli.hpp"

int main(int argc, char** argv) { return prodsat::cli::dispatch(argc, argv); }
