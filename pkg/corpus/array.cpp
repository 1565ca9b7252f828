// Array benchmark: fixed-capacity C array with the same manual
// element-by-element backward shift as raw.
//
// Usage: array <max_iter>
// Prints: checksum=<n> time_s=<t>

#include <chrono>
#include <cstdio>
#include <cstdlib>

static const long WINDOW = 100L;

int main(int argc, char **argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <max_iter>\n", argv[0]);
        return 1;
    }
    char *end = nullptr;
    long max_iter = std::strtol(argv[1], &end, 10);
    if (end == argv[1] || *end != '\0' || max_iter < 0) {
        std::fprintf(stderr, "bad max_iter: %s\n", argv[1]);
        return 1;
    }

    auto t0 = std::chrono::steady_clock::now();

    long vec[WINDOW];
    for (long i = 0; i < WINDOW; i++)
        vec[i] = i;
    for (long i = 0; i < max_iter; i++) {
        for (long j = WINDOW - 1; j >= 1; j--)
            vec[j] = vec[j - 1];
        vec[0] = i + WINDOW;
    }

    long checksum = 0;
    for (long i = 0; i < WINDOW; i++)
        checksum += vec[i];

    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::printf("checksum=%ld time_s=%.6f\n", checksum, dt.count());
    return 0;
}
