#include <cstdio>

int main() {
    std::puts("airmatrix cli placeholder");
    return 0;
}
