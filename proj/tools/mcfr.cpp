#include "mcfr/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

extern char** environ;

int main(int argc, char** argv)
{
    mcfr::CliContext ctx;
    for (char** e = environ; e && *e; ++e) {
        const std::string entry(*e);
        const auto eq = entry.find('=');
        if (eq != std::string::npos)
            ctx.env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
    }
    ctx.interactive = isatty(STDIN_FILENO) != 0;
    const std::vector<std::string> args(argv + 1, argv + argc);
    return mcfr::run_cli(args, ctx, { std::cin, std::cout, std::cerr });
}
