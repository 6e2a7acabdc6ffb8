#include <benchmark/benchmark.h>

// The packaged benchmark_main archive is built with a different LTO
// version on some distributions, so the entry point lives here.
BENCHMARK_MAIN();
