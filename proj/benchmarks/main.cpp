#include <benchmark/benchmark.h>

// Defined here rather than linked from benchmark_main: the distribution's
// static benchmark_main archive carries LTO bytecode from another compiler build.
BENCHMARK_MAIN();
