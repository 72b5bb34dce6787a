// placeholder; the acceptance suite is implemented after the unit suites
#include <cstdio>
int main() {
    std::printf("acceptance suite not yet implemented\n");
    return 1;
}
