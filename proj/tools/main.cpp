#include "bg2lab/cli_app.hpp"

int main(int argc, char** argv) { return bg2lab::cli::main_entry(argc, argv); }
