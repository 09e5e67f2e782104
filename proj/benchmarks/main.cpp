#include <benchmark/benchmark.h>

// The distro ships benchmark_main only as LTO bytecode, so the entry point lives here.
BENCHMARK_MAIN();
