#include "hbcd/cli.hpp"

int main(int argc, char** argv) {
    return hbcd::cli::main_entry(argc, argv);
}
