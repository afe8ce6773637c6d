#include "commands.hpp"

int main(int argc, char** argv) { return tubeq::cli::main_entry(argc, argv); }
