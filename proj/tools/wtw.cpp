#include "wtw/cli.hpp"

int main(int argc, char** argv) { return wtw::cli::run(argc, argv); }
