#include "mfmrasch/cli.hpp"

int main(int argc, char** argv) { return mfmrasch::cli::run(argc, argv); }
