#include <iostream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "tfn_cli/cli.hpp"

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    // Keep activation buffers on the heap between batches.
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    std::vector<std::string> args(argv, argv + argc);
    return tfn::cli::run(args, std::cout, std::cerr);
}
