#include "cli/app.hpp"

int main(int argc, char** argv) { return adl::cli::run(argc, argv); }
