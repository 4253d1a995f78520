#include <cstdlib>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::map<std::string, std::string> env;
    for (const char* name : {"MLFORGE_ENDPOINT", "MLFORGE_USER"}) {
        if (const char* v = std::getenv(name)) {
            env[name] = v;
        }
    }
    return mlforge::cli::dispatch(args, env, std::cout, std::cerr);
}
