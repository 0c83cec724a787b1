// oqsid_main.cpp — CLI entry point

#include "oqsid/cli.hpp"

int main(int argc, char** argv) { return oqsid::cli::run(argc, argv); }
