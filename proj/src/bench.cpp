#include "pgas/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <vector>

#include "pgas/algorithms.hpp"
#include "pgas/array.hpp"
#include "pgas/spmd.hpp"

namespace pgas::bench {

namespace {

using Clock = std::chrono::steady_clock;

template <typename T>
inline void do_not_optimize(T* p) {
  __asm__ volatile("" : : "r"(p) : "memory");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::string csv_header() { return "name,n,units,variant,reps,metric,unit_of_measure"; }

std::string csv_row(const BenchResult& r) {
  std::ostringstream out;
  out << r.name << ',' << r.n << ',' << r.units << ',' << r.variant << ',' << r.repetitions
      << ',' << r.metric << ',' << r.unit_of_measure;
  return out.str();
}

std::string iso8601_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

const char* to_string(GupsVariant v) {
  switch (v) {
    case GupsVariant::LocalSubscript: return "local_subscript";
    case GupsVariant::LocalIterator: return "local_iterator";
    case GupsVariant::LocalPointer: return "local_pointer";
    case GupsVariant::RawBuffer: return "raw_buffer";
    case GupsVariant::ReferenceSequentialContainer: return "reference_sequential_container";
    case GupsVariant::PatternLookup: return "pattern_lookup";
  }
  return "?";
}

std::optional<GupsVariant> gups_variant_from_string(const std::string& s) {
  for (GupsVariant v :
       {GupsVariant::LocalSubscript, GupsVariant::LocalIterator, GupsVariant::LocalPointer,
        GupsVariant::RawBuffer, GupsVariant::ReferenceSequentialContainer,
        GupsVariant::PatternLookup}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

BenchResult run_gups(std::uint64_t n_local, std::uint32_t rounds, GupsVariant variant,
                     std::uint32_t repetitions) {
  Runtime& rt = runtime();
  Team& team = rt.team_all();
  const std::uint32_t units = team.size();
  repetitions = std::max(repetitions, 3u);

  std::vector<double> rates;
  for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
    double seconds = 0;
    bool valid = true;

    if (variant == GupsVariant::RawBuffer ||
        variant == GupsVariant::ReferenceSequentialContainer) {
      std::vector<std::int32_t> buf(n_local, 0);
      std::int32_t* p = buf.data();
      team.barrier();
      auto t0 = Clock::now();
      for (std::uint32_t r = 0; r < rounds; ++r) {
        if (variant == GupsVariant::RawBuffer) {
          for (std::uint64_t i = 0; i < n_local; ++i) ++p[i];
        } else {
          for (std::uint64_t i = 0; i < n_local; ++i) ++buf[i];
        }
        do_not_optimize(p);
      }
      auto t1 = Clock::now();
      team.barrier();
      seconds = std::chrono::duration<double>(t1 - t0).count();
      for (std::uint64_t i = 0; i < n_local; ++i)
        valid = valid && buf[i] == static_cast<std::int32_t>(rounds);
    } else {
      DistributedArray<std::int32_t> arr(n_local * units);
      auto local = arr.local();
      std::fill(local.begin(), local.end(), 0);
      team.barrier();
      auto t0 = Clock::now();
      for (std::uint32_t r = 0; r < rounds; ++r) {
        switch (variant) {
          case GupsVariant::LocalSubscript: {
            const std::uint64_t n = local.size();
            for (std::uint64_t i = 0; i < n; ++i) ++local[i];
            break;
          }
          case GupsVariant::LocalIterator: {
            for (auto it = local.begin(); it != local.end(); ++it) ++*it;
            break;
          }
          case GupsVariant::LocalPointer: {
            for (std::int32_t* p = arr.lbegin(); p != arr.lend(); ++p) ++*p;
            break;
          }
          case GupsVariant::PatternLookup: {
            const std::uint64_t n = local.size();
            for (std::uint64_t i = 0; i < n; ++i) {
              std::uint64_t g = arr.global_index_of_local(i);
              GlobalRef<std::int32_t> ref = arr[g];
              ref = static_cast<std::int32_t>(ref) + 1;
            }
            break;
          }
          default: break;
        }
        do_not_optimize(local.data());
      }
      auto t1 = Clock::now();
      team.barrier();
      seconds = std::chrono::duration<double>(t1 - t0).count();
      for (std::uint64_t i = 0; i < local.size(); ++i)
        valid = valid && local[i] == static_cast<std::int32_t>(rounds);
      team.barrier();
    }

    std::uint8_t all_valid = team.all_reduce(
        static_cast<std::uint8_t>(valid), [](std::uint8_t a, std::uint8_t b) {
          return static_cast<std::uint8_t>(a & b);
        });
    if (!all_valid)
      throw error("gups correctness gate failed: elements do not equal the round count");
    double rate = static_cast<double>(n_local) * rounds * units / seconds;
    // rank 0's timing is authoritative; keep every unit in lockstep
    rates.push_back(team.broadcast(rate, UnitId{0}));
  }

  BenchResult result;
  result.name = "gups";
  result.n = n_local;
  result.units = units;
  result.variant = to_string(variant);
  result.repetitions = repetitions;
  result.metric = median(rates);
  result.unit_of_measure = "updates/s";
  result.timestamp = iso8601_now();
  return result;
}

std::int32_t min_element_value(std::uint64_t index) {
  return static_cast<std::int32_t>(splitmix64(index ^ 0x5eedull) & 0x7fffffff);
}

BenchResult run_min_element(std::uint64_t n, std::uint32_t units, bool use_processes,
                            std::uint32_t repetitions) {
  repetitions = std::max(repetitions, 3u);

  // Independent oracle: a sequential scan of the deterministic generator.
  std::uint64_t expect_index = 0;
  std::int32_t expect_value = min_element_value(0);
  for (std::uint64_t i = 1; i < n; ++i) {
    std::int32_t v = min_element_value(i);
    if (v < expect_value) {
      expect_value = v;
      expect_index = i;
    }
  }

  char path[] = "/tmp/pgas-minelement-XXXXXX";
  int fd = ::mkstemp(path);
  if (fd < 0) throw error("cannot create result file");
  ::close(fd);
  std::string result_path = path;

  auto worker = [n, repetitions, expect_index, expect_value,
                 result_path](Runtime& rt) {
    DistributedArray<std::int32_t> arr(n);
    pgas::generate(arr.begin(), arr.end(), [](std::uint64_t i) { return min_element_value(i); });
    std::vector<double> seconds;
    for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
      rt.team_all().barrier();
      auto t0 = Clock::now();
      auto it = pgas::min_element(arr.begin(), arr.end());
      auto t1 = Clock::now();
      if (it.index() != expect_index ||
          static_cast<std::int32_t>(*it) != expect_value)
        throw error("min_element oracle mismatch");
      seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    if (rt.my_id().value == 0) {
      std::ofstream out(result_path);
      for (double s : seconds) out << s << '\n';
    }
    rt.team_all().barrier();
  };

  if (use_processes) {
    auto statuses = spmd::run_processes(units, worker);
    for (auto s : statuses) {
      if (s != 0) throw error("min-element worker failed with status " + std::to_string(s));
    }
  } else {
    spmd::run_threads(units, worker);
  }

  std::ifstream in(result_path);
  std::vector<double> seconds;
  double s;
  while (in >> s) seconds.push_back(s);
  ::unlink(result_path.c_str());
  if (seconds.size() != repetitions) throw error("benchmark produced no timings");

  BenchResult result;
  result.name = "min-element";
  result.n = n;
  result.units = units;
  result.variant = use_processes ? "tcp_process" : "in_process";
  result.repetitions = repetitions;
  result.metric = median(seconds);
  result.unit_of_measure = "seconds";
  result.timestamp = iso8601_now();
  return result;
}

}  // namespace pgas::bench
