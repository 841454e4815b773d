// Benchmark driver: local-update throughput (gups) and min_element timing.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pgas/bench.hpp"
#include "pgas/spmd.hpp"

namespace {

void emit(const pgas::bench::BenchResult& result, const std::string& out_path) {
  std::string text = pgas::bench::csv_header() + "\n" + pgas::bench::csv_row(result) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    out << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pgas benchmarks"};
  app.require_subcommand(1);

  auto* gups = app.add_subcommand("gups", "local update rate across access variants");
  std::uint64_t n_local = 1000000;
  std::uint32_t rounds = 50;
  std::string variant_name = "local_subscript";
  std::uint32_t gups_units = 1;
  std::uint32_t reps = 3;
  std::string out_path;
  gups->add_option("--n-local", n_local, "elements per unit");
  gups->add_option("--rounds", rounds, "update sweeps per repetition");
  gups->add_option("--variant", variant_name,
                   "local_subscript|local_iterator|local_pointer|raw_buffer|"
                   "reference_sequential_container|pattern_lookup");
  gups->add_option("--units", gups_units, "unit threads");
  gups->add_option("--reps", reps, "repetitions (median reported)");
  gups->add_option("-o,--output", out_path, "CSV output file (default stdout)");

  auto* minel = app.add_subcommand("min-element", "distributed minimum search timing");
  std::uint64_t n_total = 100000000;
  std::uint32_t me_units = 1;
  std::string transport = "process";
  minel->add_option("--n", n_total, "total elements");
  minel->add_option("--units", me_units, "units");
  minel->add_option("--transport", transport, "process (tcp) or thread")
      ->check(CLI::IsMember({"process", "thread"}));
  minel->add_option("--reps", reps, "repetitions (median reported)");
  minel->add_option("-o,--output", out_path, "CSV output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gups->parsed()) {
      auto variant = pgas::bench::gups_variant_from_string(variant_name);
      if (!variant) {
        std::fprintf(stderr, "bench: unknown variant '%s'\n", variant_name.c_str());
        return 2;
      }
      pgas::bench::BenchResult result;
      pgas::spmd::ThreadRunOptions opts;
      opts.debug_checks = false;
      pgas::spmd::run_threads(
          gups_units,
          [&](pgas::Runtime& rt) {
            auto r = pgas::bench::run_gups(n_local, rounds, *variant, reps);
            if (rt.my_id().value == 0) result = r;
          },
          opts);
      emit(result, out_path);
    } else {
      auto result =
          pgas::bench::run_min_element(n_total, me_units, transport == "process", reps);
      emit(result, out_path);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bench: %s\n", e.what());
    return 1;
  }
  return 0;
}
