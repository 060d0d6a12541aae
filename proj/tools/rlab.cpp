#include <cstdio>

int main(int, char**) {
    std::fprintf(stderr, "rlab: no subcommand given\n");
    return 2;
}
