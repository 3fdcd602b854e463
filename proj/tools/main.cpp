#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    gse::cli::RunConfig cfg;
    if (const int code = gse::cli::parse_command_line(argc, argv, cfg, std::cout, std::cerr); code >= 0) return code;
    return gse::cli::run(cfg, std::cerr);
}
