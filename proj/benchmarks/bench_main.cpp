#include <benchmark/benchmark.h>

// The distro's libbenchmark_main is LTO bytecode from a different compiler
// release, so the entry point lives here.
BENCHMARK_MAIN();
