#include "cli.hpp"

int main(int argc, char** argv) { return portsheaf::cli::main_entry(argc, argv); }
