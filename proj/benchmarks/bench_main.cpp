#include <benchmark/benchmark.h>

// The distro's libbenchmark_main.a carries incompatible LTO bytecode, so the
// entry point lives here and only the shared runtime library is linked.
BENCHMARK_MAIN();
