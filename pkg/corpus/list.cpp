// List benchmark: doubly linked ring of WINDOW nodes. The rotation
// overwrites the tail node's value and moves the first/last cursors;
// no allocation or shifting per iteration.
//
// Usage: list <max_iter>
// Prints: checksum=<n> time_s=<t>

#include <chrono>
#include <cstdio>
#include <cstdlib>

static const long WINDOW = 100L;

struct str_list {
    long num;
    str_list *prev;
    str_list *next;
};

// allocate a node holding num and prepend it to *first
static str_list *add_new(str_list *first, long num) {
    str_list *node = new str_list;
    node->num = num;
    node->prev = nullptr;
    node->next = first;
    if (first != nullptr)
        first->prev = node;
    return node;
}

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

    str_list *first = nullptr;
    str_list *last = nullptr;
    for (long i = WINDOW - 1; i >= 0; i--) {
        first = add_new(first, i);
        if (i == WINDOW - 1)
            last = first;
    }
    // close the ring so the cursors can rotate forever
    first->prev = last;
    last->next = first;

    for (long i = 0; i < max_iter; i++) {
        last->num = i + WINDOW;
        first = last;
        last = last->prev;
    }

    long checksum = 0;
    str_list *node = first;
    for (long i = 0; i < WINDOW; i++) {
        checksum += node->num;
        node = node->next;
    }

    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::printf("checksum=%ld time_s=%.6f\n", checksum, dt.count());

    node = first->next;
    while (node != first) {
        str_list *next = node->next;
        delete node;
        node = next;
    }
    delete first;
    return 0;
}
