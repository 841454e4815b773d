#include <doctest.h>

#include "pgas/bench.hpp"
#include "pgas/spmd.hpp"

using namespace pgas;

TEST_CASE("gups validates before reporting and fills the result record") {
  spmd::ThreadRunOptions opts;
  opts.debug_checks = false;
  bench::BenchResult result;
  spmd::run_threads(
      2,
      [&](Runtime& rt) {
        auto r = bench::run_gups(5000, 7, bench::GupsVariant::LocalSubscript, 3);
        if (rt.my_id().value == 0) result = r;
      },
      opts);
  CHECK(result.name == "gups");
  CHECK(result.n == 5000);
  CHECK(result.units == 2);
  CHECK(result.variant == "local_subscript");
  CHECK(result.repetitions == 3);
  CHECK(result.metric > 0);
  CHECK(result.unit_of_measure == "updates/s");
  CHECK(!result.timestamp.empty());
}

TEST_CASE("csv schema is stable") {
  CHECK(bench::csv_header() == "name,n,units,variant,reps,metric,unit_of_measure");
  bench::BenchResult r{"gups", 10, 2, "raw_buffer", 3, 1.5, "updates/s", "t"};
  CHECK(bench::csv_row(r) == "gups,10,2,raw_buffer,3,1.5,updates/s");
}

TEST_CASE("every variant runs its correctness gate") {
  spmd::ThreadRunOptions opts;
  opts.debug_checks = false;
  spmd::run_threads(
      1,
      [&](Runtime&) {
        for (auto v :
             {bench::GupsVariant::LocalSubscript, bench::GupsVariant::LocalIterator,
              bench::GupsVariant::LocalPointer, bench::GupsVariant::RawBuffer,
              bench::GupsVariant::ReferenceSequentialContainer,
              bench::GupsVariant::PatternLookup}) {
          auto r = bench::run_gups(2000, 5, v, 3);
          CHECK(r.metric > 0);
        }
      },
      opts);
}

TEST_CASE("harness resolves differences: per-access pattern lookup is slower") {
  spmd::ThreadRunOptions opts;
  opts.debug_checks = false;
  double raw = 0, indirect = 0;
  spmd::run_threads(
      1,
      [&](Runtime&) {
        raw = bench::run_gups(200000, 20, bench::GupsVariant::RawBuffer, 3).metric;
        indirect = bench::run_gups(200000, 20, bench::GupsVariant::PatternLookup, 3).metric;
      },
      opts);
  CHECK(indirect < raw);  // measurably slower; typically by an order of magnitude
}

TEST_CASE("variant names round trip") {
  for (auto v : {bench::GupsVariant::LocalSubscript, bench::GupsVariant::RawBuffer,
                 bench::GupsVariant::PatternLookup}) {
    auto parsed = bench::gups_variant_from_string(bench::to_string(v));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == v);
  }
  CHECK_FALSE(bench::gups_variant_from_string("bogus").has_value());
}

TEST_CASE("min-element benchmark validates against its oracle (threads)") {
  auto r = bench::run_min_element(200000, 2, /*use_processes=*/false, 3);
  CHECK(r.name == "min-element");
  CHECK(r.metric > 0);
  CHECK(r.variant == "in_process");
  CHECK(r.unit_of_measure == "seconds");
}

TEST_CASE("min-element benchmark over tcp processes") {
  auto r = bench::run_min_element(50000, 2, /*use_processes=*/true, 3);
  CHECK(r.metric > 0);
  CHECK(r.variant == "tcp_process");
}
