#include <benchmark/benchmark.h>

// The distro's prebuilt benchmark_main archive is LTO bytecode tied to one
// compiler patch release, so the entry point is compiled here instead.
BENCHMARK_MAIN();
