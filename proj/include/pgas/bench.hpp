#ifndef PGAS_BENCH_HPP
#define PGAS_BENCH_HPP

#include <optional>
#include <string>

#include "pgas/runtime.hpp"

namespace pgas::bench {

struct BenchResult {
  std::string name;
  std::uint64_t n = 0;  // gups: elements per unit; min-element: total elements
  std::uint32_t units = 1;
  std::string variant;
  std::uint32_t repetitions = 0;
  double metric = 0;  // median over repetitions
  std::string unit_of_measure;
  std::string timestamp;  // ISO 8601, recorded but not part of the CSV schema
};

/// Stable schema: name,n,units,variant,reps,metric,unit_of_measure
std::string csv_header();
std::string csv_row(const BenchResult& r);
std::string iso8601_now();

enum class GupsVariant {
  LocalSubscript,
  LocalIterator,
  LocalPointer,
  RawBuffer,
  ReferenceSequentialContainer,
  PatternLookup,  // deliberately indirect: per-access pattern lookup
};

const char* to_string(GupsVariant v);
std::optional<GupsVariant> gups_variant_from_string(const std::string& s);

/// Local-update throughput: `rounds` sweeps incrementing every one of
/// n_local elements by 1, timed after a validation-gated warmup layout.
/// Collective over the root team of the active runtime; the rate aggregates
/// all units. Throws if the correctness gate fails (every element must equal
/// rounds afterwards).
BenchResult run_gups(std::uint64_t n_local, std::uint32_t rounds, GupsVariant variant,
                     std::uint32_t repetitions = 3);

/// min_element timing on n pseudo-random four-byte elements (fixed seed),
/// validated against an independent sequential oracle before any timing is
/// accepted. Spawns its own units: tcp processes or in-process threads.
BenchResult run_min_element(std::uint64_t n, std::uint32_t units, bool use_processes,
                            std::uint32_t repetitions = 3);

/// The deterministic element generator used by the min-element benchmark.
std::int32_t min_element_value(std::uint64_t index);

}  // namespace pgas::bench

#endif  // PGAS_BENCH_HPP
