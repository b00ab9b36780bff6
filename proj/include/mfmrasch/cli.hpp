#ifndef MFMRASCH_CLI_HPP
#define MFMRASCH_CLI_HPP
namespace mfmrasch::cli { int run(int argc, char** argv); }
#endif
