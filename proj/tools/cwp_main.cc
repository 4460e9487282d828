#include "cwp/cli.h"

int main(int argc, char** argv) { return cwp::cli::run(argc, argv); }
