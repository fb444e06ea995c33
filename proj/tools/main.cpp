#include <cstdio>

int main() {
    std::puts("lsrl: subcommands not wired up yet");
    return 1;
}
