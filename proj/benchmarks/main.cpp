#include <benchmark/benchmark.h>

// libbenchmark_main is not usable on every distro build, so the main lives here.
BENCHMARK_MAIN();
