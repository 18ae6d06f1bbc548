#include "labelsearch/cli.hpp"

int main(int argc, char** argv) { return labelsearch::cli::dispatch(argc, argv); }
