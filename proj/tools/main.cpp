#include <iostream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "cli.hpp"

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    // Tape buffers are a few hundred KB each; keep them off mmap.
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
#endif
    std::vector<std::string> args(argv + 1, argv + argc);
    return spreader_gnn::cli::run(args, std::cout, std::cerr);
}
