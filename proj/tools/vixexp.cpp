#include "commands.hpp"

int main(int argc, char** argv) { return vixexp::cli::run(argc, argv); }
