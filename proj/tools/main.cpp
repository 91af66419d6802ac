#include "cli.hpp"

int main(int argc, char** argv) { return opfcut::cli::dispatch(argc, argv); }
