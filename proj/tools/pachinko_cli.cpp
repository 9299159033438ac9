#include <cstdio>

int main() {
    std::puts("pachinko: not wired up yet");
    return 0;
}
