#include <cstdio>

int main() {
    std::puts("coneshap cli placeholder");
    return 0;
}
