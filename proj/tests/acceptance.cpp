// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit status 0 iff all runnable criteria
// passed (criterion 8 is excluded by design and does not affect the status).

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pgas/algorithms.hpp"
#include "pgas/array.hpp"
#include "pgas/bench.hpp"
#include "pgas/inproc_transport.hpp"
#include "pgas/pattern_viz.hpp"
#include "pgas/spmd.hpp"
#include "pgas/tcp_transport.hpp"

using namespace pgas;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_golden_dir = "tests/golden";
int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// ---- criterion 1: pattern bijection + inverse, exhaustive ------------------

bool pattern_bijection_holds(const Pattern& p, std::string& err) {
  const std::uint64_t total = p.size();
  const std::uint32_t units = p.team_size();
  std::uint64_t sum = 0;
  std::vector<std::uint64_t> sizes(units);
  for (std::uint32_t u = 0; u < units; ++u) {
    sizes[u] = p.local_size(u);
    sum += sizes[u];
  }
  if (sum != total) {
    err = "local sizes do not partition the element count";
    return false;
  }
  std::vector<std::vector<std::uint8_t>> hit(units);
  for (std::uint32_t u = 0; u < units; ++u) hit[u].assign(sizes[u], 0);

  const std::size_t d = p.ndim();
  std::vector<std::uint64_t> coord(d, 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    std::uint32_t owner = p.unit_of({coord.data(), d});
    LocalPos pos = p.local_index_of({coord.data(), d});
    if (pos.unit != owner) {
      err = "unit_of and local_index_of disagree";
      return false;
    }
    if (pos.offset >= sizes[pos.unit]) {
      err = "local offset exceeds local size";
      return false;
    }
    if (hit[pos.unit][pos.offset]++) {
      err = "two coordinates map to one local slot";
      return false;
    }
    Coords back = p.global_coord_of(pos.unit, pos.offset);
    for (std::size_t k = 0; k < d; ++k) {
      if (back[k] != coord[k]) {
        err = "inverse(forward) is not the identity";
        return false;
      }
    }
    for (std::size_t k = d; k-- > 0;) {
      if (++coord[k] < p.extent(k)) break;
      coord[k] = 0;
    }
  }
  return true;
}

void criterion1() {
  auto start = Clock::now();
  std::uint64_t checked = 0;
  std::string err;

  auto dists_1d = [] {
    std::vector<DistributionSpec> out{DistributionSpec::blocked(), DistributionSpec::none()};
    for (std::uint64_t b = 1; b <= 7; ++b) {
      out.push_back(DistributionSpec::block_cyclic(b));
      out.push_back(DistributionSpec::tile(b));
    }
    return out;
  }();

  for (std::uint64_t n = 0; n <= 200; ++n) {
    for (std::uint32_t u = 1; u <= 8; ++u) {
      for (auto dist : dists_1d) {
        Pattern p = Pattern::make_1d(n, dist, u);
        if (!pattern_bijection_holds(p, err)) {
          report(1, false, "1-D n=" + std::to_string(n) + " u=" + std::to_string(u) +
                               ": " + err);
          return;
        }
        ++checked;
      }
    }
  }

  const std::vector<DistributionSpec> dist_menu{
      DistributionSpec::blocked(), DistributionSpec::none(), DistributionSpec::block_cyclic(3),
      DistributionSpec::tile(2)};
  const std::vector<std::vector<std::uint32_t>> teams_2d{{1, 1}, {2, 2}, {4, 1}, {1, 4},
                                                         {2, 4}, {8, 1}, {3, 2}};
  for (std::uint64_t n0 = 1; n0 <= 12; ++n0) {
    for (std::uint64_t n1 = 1; n1 <= 12; ++n1) {
      for (auto d0 : dist_menu) {
        for (auto d1 : dist_menu) {
          for (const auto& ts : teams_2d) {
            for (auto order : {MemoryOrder::RowMajor, MemoryOrder::ColMajor}) {
              Pattern p({n0, n1}, {d0, d1},
                        TeamSpec(std::span<const std::uint32_t>(ts)), order);
              if (!pattern_bijection_holds(p, err)) {
                report(1, false, "2-D " + std::to_string(n0) + "x" + std::to_string(n1) +
                                     ": " + err);
                return;
              }
              ++checked;
            }
          }
        }
      }
    }
  }

  const std::vector<std::uint64_t> ext_3d{1, 2, 3, 4, 6, 12};
  const std::vector<std::vector<std::uint32_t>> teams_3d{{2, 2, 2}, {1, 2, 4}, {8, 1, 1},
                                                         {1, 1, 1}};
  for (auto n0 : ext_3d) {
    for (auto n1 : ext_3d) {
      for (auto n2 : ext_3d) {
        for (std::size_t di = 0; di < dist_menu.size() * dist_menu.size(); ++di) {
          auto d0 = dist_menu[di % dist_menu.size()];
          auto d1 = dist_menu[(di / dist_menu.size()) % dist_menu.size()];
          auto d2 = dist_menu[(di + di / dist_menu.size()) % dist_menu.size()];
          for (const auto& ts : teams_3d) {
            for (auto order : {MemoryOrder::RowMajor, MemoryOrder::ColMajor}) {
              Pattern p({n0, n1, n2}, {d0, d1, d2},
                        TeamSpec(std::span<const std::uint32_t>(ts)), order);
              if (!pattern_bijection_holds(p, err)) {
                report(1, false, "3-D case failed: " + err);
                return;
              }
              ++checked;
            }
          }
        }
      }
    }
  }

  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  bool in_budget = secs < 30.0;
  report(1, in_budget,
         "pattern bijection + inverse identity on " + std::to_string(checked) +
             " patterns, exhaustive per pattern (" + std::to_string(secs) + " s, budget 30 s)");
}

// ---- criterion 2: figure reproduction, byte-exact ---------------------------

void criterion2() {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"20 BLOCKED team 4", "fig3_row1_blocked.txt"},
      {"20 BLOCKED team 4", "fig3_row2_blocked.txt"},
      {"20 CYCLIC team 4", "fig3_row3_cyclic.txt"},
      {"20 BLOCKCYCLIC(3) team 4", "fig3_row4_blockcyclic3.txt"},
      {"14 BLOCKED team 4", "fig4_n14_blocked.txt"},
      {"16x10 BLOCKED,NONE team 4x1", "fig5_left.txt"},
      {"16x10 NONE,BLOCKED team 1x4", "fig5_middle.txt"},
      {"16x10 TILE(4),TILE(2) team 2x2 col", "fig5_right.txt"},
  };
  // anchors transcribed from the figures
  const std::vector<std::pair<std::string, std::string>> anchors{
      {"20 BLOCKED team 4", "00000111112222233333"},
      {"20 BLOCKCYCLIC(3) team 4", "00011122233300011122"},
      {"14 BLOCKED team 4", "00001111222233"},
      {"16x10 NONE,BLOCKED team 1x4", "0001112223"},
  };
  for (const auto& [spec, expect_line] : anchors) {
    std::string got = render_pattern_text(parse_pattern_spec(spec));
    if (got.substr(0, got.find('\n')) != expect_line) {
      report(2, false, "owner grid for '" + spec + "' does not match the figure");
      return;
    }
  }
  for (const auto& [spec, file] : cases) {
    std::ifstream in(g_golden_dir + "/" + file, std::ios::binary);
    if (!in) {
      report(2, false, "missing golden file " + file);
      return;
    }
    std::ostringstream golden;
    golden << in.rdbuf();
    std::string got = render_pattern_text(parse_pattern_spec(spec));
    if (got != golden.str()) {
      report(2, false, "rendering of '" + spec + "' differs from golden " + file);
      return;
    }
  }
  report(2, true,
         "visualizer output matches all " + std::to_string(cases.size()) +
             " committed golden grids byte-exactly");
}

// ---- criteria 3 & 7: algorithm oracle equivalence ---------------------------

struct TrialConfig {
  std::uint32_t units;
  DistributionSpec dist;
  DistributionSpec out_dist;
  const char* dist_name;
};

// One configuration's 100 randomized trials; runs inside an active runtime.
// Throws on the first mismatch (every unit checks everything it can check
// deterministically; rank 0 additionally verifies via one-sided gathers).
void algorithm_trials(Runtime& rt, const TrialConfig& cfg, int trials) {
  Team& team = rt.team_all();
  const std::uint32_t me = rt.my_id().value;

  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = 0xC0FFEEull * (trial + 1) + cfg.units * 131 +
                               static_cast<std::uint64_t>(cfg.dist.kind) * 17 + cfg.dist.param;
    std::mt19937_64 rng(seed);  // identical stream on every unit
    const std::uint64_t n = trial == 0 ? 0 : 1 + rng() % (trial % 7 == 0 ? 10000 : 1500);

    auto value_of = [seed](std::uint64_t i) {
      return static_cast<std::int64_t>(splitmix64(seed ^ (i * 2654435761ull)) % 2001) - 1000;
    };

    DistributedArray<std::int64_t> a(n, cfg.dist, team);
    DistributedArray<std::int64_t> b(n, cfg.out_dist, team);
    std::vector<std::int64_t> ref(n);
    for (std::uint64_t i = 0; i < n; ++i) ref[i] = value_of(i);

    pgas::generate(a.begin(), a.end(), value_of);

    auto check_equal_everywhere = [&](auto value, const char* what) {
      auto all = team.all_gather(value);
      for (auto v : all) {
        if (v != value) throw error(std::string(what) + ": units disagree");
      }
    };
    auto gather_and_compare = [&](DistributedArray<std::int64_t>& arr,
                                  const std::vector<std::int64_t>& expect, const char* what) {
      std::uint8_t ok = 1;
      if (me == 0 && n > 0) {
        std::vector<std::int64_t> buf(n);
        pgas::copy(arr.begin(), arr.end(), buf.data());
        ok = buf == expect ? 1 : 0;
      }
      ok = team.broadcast(ok, UnitId{0});
      if (!ok) throw error(std::string(what) + ": contents differ from the reference");
    };

    gather_and_compare(a, ref, "generate");

    // accumulate
    std::int64_t init = static_cast<std::int64_t>(rng() % 100);
    std::int64_t sum = pgas::accumulate(a.begin(), a.end(), init);
    std::int64_t ref_sum = init;
    for (auto v : ref) ref_sum += v;
    if (sum != ref_sum) throw error("accumulate mismatch");
    check_equal_everywhere(sum, "accumulate");

    // min/max element with index tie-breaks
    auto min_it = pgas::min_element(a.begin(), a.end());
    auto max_it = pgas::max_element(a.begin(), a.end());
    if (n == 0) {
      if (min_it != a.end() || max_it != a.end())
        throw error("extremum of empty range must be end");
    } else {
      std::uint64_t ref_min = 0, ref_max = 0;
      for (std::uint64_t i = 1; i < n; ++i) {
        if (ref[i] < ref[ref_min]) ref_min = i;
        if (ref[i] > ref[ref_max]) ref_max = i;
      }
      if (min_it.index() != ref_min) throw error("min_element index mismatch");
      if (max_it.index() != ref_max) throw error("max_element index mismatch");
      check_equal_everywhere(min_it.index(), "min_element");
    }

    // find: a guaranteed-present value and a guaranteed-absent one
    if (n > 0) {
      std::int64_t needle = ref[rng() % n];
      std::uint64_t ref_first = 0;
      while (ref[ref_first] != needle) ++ref_first;
      auto found = pgas::find(a.begin(), a.end(), needle);
      if (found.index() != ref_first) throw error("find returned a non-first match");
      check_equal_everywhere(found.index(), "find");
    }
    if (pgas::find(a.begin(), a.end(), std::int64_t{5000}) != a.end())
      throw error("find of an absent value must be end");

    // predicates
    std::int64_t threshold = static_cast<std::int64_t>(rng() % 2001) - 1000;
    auto pred = [threshold](std::int64_t v) { return v < threshold; };
    bool ref_all = true, ref_any = false;
    for (auto v : ref) {
      ref_all = ref_all && pred(v);
      ref_any = ref_any || pred(v);
    }
    if (pgas::all_of(a.begin(), a.end(), pred) != ref_all) throw error("all_of mismatch");
    if (pgas::any_of(a.begin(), a.end(), pred) != ref_any) throw error("any_of mismatch");
    if (pgas::none_of(a.begin(), a.end(), pred) != !ref_any) throw error("none_of mismatch");

    // transform into a differently distributed array
    pgas::transform(a.begin(), a.end(), b.begin(),
                    [](std::int64_t v) { return 3 * v - 7; });
    std::vector<std::int64_t> ref_b(n);
    for (std::uint64_t i = 0; i < n; ++i) ref_b[i] = 3 * ref[i] - 7;
    gather_and_compare(b, ref_b, "transform");

    // for_each mutation on a sub-range
    std::uint64_t lo = n ? rng() % n : 0;
    std::uint64_t hi = n ? lo + rng() % (n - lo + 1) : 0;
    pgas::for_each(a.begin() + static_cast<std::int64_t>(lo),
                   a.begin() + static_cast<std::int64_t>(hi),
                   [](std::int64_t& v) { v += 11; });
    for (std::uint64_t i = lo; i < hi; ++i) ref[i] += 11;
    gather_and_compare(a, ref, "for_each");

    // copy: local -> global from one writer, then global -> local everywhere
    if (n > 0) {
      std::uint32_t writer = static_cast<std::uint32_t>(rng() % cfg.units);
      std::uint64_t wlo = rng() % n;
      std::uint64_t wlen = rng() % (n - wlo + 1);
      std::vector<std::int64_t> wdata(wlen);
      for (std::uint64_t i = 0; i < wlen; ++i)
        wdata[i] = static_cast<std::int64_t>(splitmix64(seed ^ (0xABCD + i)) % 777);
      if (me == writer && wlen > 0) {
        auto h = pgas::copy_async(wdata.data(), wdata.data() + wlen,
                                  a.begin() + static_cast<std::int64_t>(wlo));
        h.wait();
        rt.flush_all();
      }
      for (std::uint64_t i = 0; i < wlen; ++i) ref[wlo + i] = wdata[i];
      team.barrier();
      gather_and_compare(a, ref, "copy(local->global)");
    }

    // fill a sub-range
    std::int64_t fill_v = static_cast<std::int64_t>(rng() % 97);
    pgas::fill(a.begin() + static_cast<std::int64_t>(lo),
               a.begin() + static_cast<std::int64_t>(hi), fill_v);
    for (std::uint64_t i = lo; i < hi; ++i) ref[i] = fill_v;
    gather_and_compare(a, ref, "fill");
  }
}

bool run_algorithm_suite(bool use_processes, int trials, std::string& detail,
                         double* elapsed = nullptr) {
  const std::vector<std::pair<DistributionSpec, const char*>> dists{
      {DistributionSpec::blocked(), "BLOCKED"},
      {DistributionSpec::cyclic(), "CYCLIC"},
      {DistributionSpec::block_cyclic(3), "BLOCKCYCLIC(3)"},
  };
  auto start = Clock::now();
  for (std::uint32_t units : {1u, 2u, 4u, 8u}) {
    for (std::size_t di = 0; di < dists.size(); ++di) {
      TrialConfig cfg{units, dists[di].first, dists[(di + 1) % dists.size()].first,
                      dists[di].second};
      auto worker = [&cfg, trials](Runtime& rt) { algorithm_trials(rt, cfg, trials); };
      if (use_processes) {
        auto statuses = spmd::run_processes(units, worker);
        for (auto s : statuses) {
          if (s != 0) {
            detail = std::string("U=") + std::to_string(units) + " " + cfg.dist_name +
                     ": a worker failed (see stderr)";
            return false;
          }
        }
      } else {
        try {
          spmd::run_threads(units, worker);
        } catch (const std::exception& e) {
          detail = std::string("U=") + std::to_string(units) + " " + cfg.dist_name + ": " +
                   e.what();
          return false;
        }
      }
    }
  }
  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (elapsed) *elapsed = secs;
  detail = std::to_string(trials) +
           " randomized trials x {1,2,4,8} units x {BLOCKED, CYCLIC, BLOCKCYCLIC(3)}, every "
           "algorithm vs the sequential reference, exact (" +
           std::to_string(secs) + " s)";
  return true;
}

void criterion3() {
  std::string detail;
  double secs = 0;
  bool ok = run_algorithm_suite(/*use_processes=*/false, 100, detail, &secs);
  ok = ok && secs < 300.0;  // stated budget: 5 minutes on the thread transport
  report(3, ok, "thread transport: " + detail);
}

// ---- criterion 4: GUPS relative performance ---------------------------------

void criterion4() {
  constexpr std::uint64_t kNLocal = 1u << 20;  // >= 10^6
  constexpr std::uint32_t kRounds = 40;
  double raw = 0, subscript = 0, iterator = 0, pointer = 0;
  spmd::ThreadRunOptions opts;
  opts.debug_checks = false;
  try {
    spmd::run_threads(
        1,
        [&](Runtime&) {
          raw = bench::run_gups(kNLocal, kRounds, bench::GupsVariant::RawBuffer).metric;
          subscript =
              bench::run_gups(kNLocal, kRounds, bench::GupsVariant::LocalSubscript).metric;
          iterator =
              bench::run_gups(kNLocal, kRounds, bench::GupsVariant::LocalIterator).metric;
          pointer =
              bench::run_gups(kNLocal, kRounds, bench::GupsVariant::LocalPointer).metric;
        },
        opts);
  } catch (const std::exception& e) {
    report(4, false, std::string("gups benchmark failed: ") + e.what());
    return;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "local access rates vs raw buffer (%.2fe9/s): subscript %.2fx, iterator "
                "%.2fx, pointer %.2fx (each must be >= 0.5x)",
                raw / 1e9, subscript / raw, iterator / raw, pointer / raw);
  bool ok = subscript >= 0.5 * raw && iterator >= 0.5 * raw && pointer >= 0.5 * raw;
  report(4, ok, buf);
}

// ---- criterion 5: min_element scaling ---------------------------------------

void criterion5() {
  const unsigned cores = std::thread::hardware_concurrency();
  try {
    auto big1 = bench::run_min_element(100000000, 1, /*use_processes=*/true, 3);
    auto big8 = bench::run_min_element(100000000, 8, /*use_processes=*/true, 3);
    auto small1 = bench::run_min_element(1000, 1, /*use_processes=*/true, 3);
    auto small8 = bench::run_min_element(1000, 8, /*use_processes=*/true, 3);
    bool compute_ok = big8.metric <= 0.5 * big1.metric;
    bool comm_ok = small8.metric >= small1.metric;
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "tcp transport, n=1e8: U=1 %.3f s vs U=8 %.3f s (need <= 0.5x%s); n=1e3: "
                  "U=1 %.2e s vs U=8 %.2e s (need U=8 >= U=1)",
                  big1.metric, big8.metric,
                  cores < 8 ? ", machine has fewer than 8 physical cores" : "", small1.metric,
                  small8.metric);
    report(5, compute_ok && comm_ok, buf);
  } catch (const std::exception& e) {
    report(5, false, std::string("min-element benchmark failed: ") + e.what());
  }
}

// ---- criterion 6: one-sided consistency --------------------------------------

void run_round_trips(Transport& t, std::function<void()> sync, int trials,
                     std::uint64_t seed) {
  std::vector<std::byte> storage(4096);
  t.register_segment(SegmentId{1}, storage);
  sync();
  std::mt19937_64 rng(seed + t.self().value * 7919);
  const std::uint32_t n = t.world_size();
  for (int i = 0; i < trials; ++i) {
    std::uint32_t target = static_cast<std::uint32_t>(rng() % n);
    std::size_t len = 1 + rng() % 64;
    // each initiator owns a disjoint 512-byte window on every target
    std::uint64_t offset = t.self().value * 512 + rng() % (512 - len);
    std::vector<std::byte> payload(len), back(len);
    for (auto& x : payload) x = static_cast<std::byte>(rng());
    t.put(UnitId{target}, SegmentId{1}, offset, payload).wait();
    t.flush(UnitId{target});
    t.get(UnitId{target}, SegmentId{1}, offset, back).wait();
    if (std::memcmp(payload.data(), back.data(), len) != 0)
      throw error("round trip returned different bytes");
  }
  sync();
  t.unregister_segment(SegmentId{1});
}

void run_torn_read_stress(Transport& t, std::function<void()> sync, double seconds) {
  alignas(8) std::vector<std::byte> storage(64);
  t.register_segment(SegmentId{1}, storage);
  sync();
  const auto deadline = Clock::now() + std::chrono::duration<double>(seconds);
  if (t.self().value == 0) {
    std::uint64_t v = 0;
    std::uint64_t reads = 0;
    while (Clock::now() < deadline) {
      t.get(UnitId{0}, SegmentId{1}, 8, {reinterpret_cast<std::byte*>(&v), 8}).wait();
      ++reads;
      if (v == 0) continue;
      std::uint64_t unit = v / 0x0101010101010101ull;
      if (v % 0x0101010101010101ull != 0 || unit == 0 || unit >= t.world_size())
        throw error("torn read observed: " + std::to_string(v));
    }
    if (reads < 100) throw error("torn-read detector made too few reads");
  } else {
    std::uint64_t sentinel = 0x0101010101010101ull * t.self().value;
    while (Clock::now() < deadline) {
      t.put(UnitId{0}, SegmentId{1}, 8, {reinterpret_cast<std::byte*>(&sentinel), 8}).wait();
    }
    t.flush(UnitId{0});
  }
  sync();
  t.unregister_segment(SegmentId{1});
}

void criterion6() {
  constexpr int kTrialsPerTransport = 5000;  // 10^4 across both transports
  constexpr double kStressSeconds = 5.0;     // x2 transports = 10 s of stress

  // in-process: 4 units round trips + 5 units (4 writers + 1 reader) stress
  try {
    auto group = std::make_shared<InProcessGroup>(4);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(4);
    for (std::uint32_t u = 0; u < 4; ++u) {
      threads.emplace_back([&, u] {
        try {
          InProcessTransport t(UnitId{u}, group, 10000);
          std::uint64_t epoch = 0;
          auto sync = [&] {
            ++epoch;
            const std::uint32_t nn = t.world_size();
            for (std::uint32_t k = 0, step = 1; step < nn; ++k, step <<= 1) {
              CtrlTag tag = make_ctrl_tag(7, epoch, CtrlPhase::Barrier, k);
              t.send_ctrl(UnitId{(u + step) % nn}, tag, {});
              t.recv_ctrl(UnitId{(u + nn - step) % nn}, tag);
            }
          };
          run_round_trips(t, sync, kTrialsPerTransport, 11);
        } catch (...) {
          errors[u] = std::current_exception();
          for (std::uint32_t v = 0; v < 4; ++v) group->mailbox(v).poison("peer failed");
        }
      });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    auto group5 = std::make_shared<InProcessGroup>(5);
    std::vector<std::thread> threads5;
    std::vector<std::exception_ptr> errors5(5);
    for (std::uint32_t u = 0; u < 5; ++u) {
      threads5.emplace_back([&, u] {
        try {
          InProcessTransport t(UnitId{u}, group5, 10000);
          std::uint64_t epoch = 0;
          auto sync = [&] {
            ++epoch;
            for (std::uint32_t k = 0, step = 1; step < 5; ++k, step <<= 1) {
              CtrlTag tag = make_ctrl_tag(7, epoch, CtrlPhase::Barrier, k);
              t.send_ctrl(UnitId{(u + step) % 5}, tag, {});
              t.recv_ctrl(UnitId{(u + 5 - step) % 5}, tag);
            }
          };
          run_torn_read_stress(t, sync, kStressSeconds);
        } catch (...) {
          errors5[u] = std::current_exception();
          for (std::uint32_t v = 0; v < 5; ++v) group5->mailbox(v).poison("peer failed");
        }
      });
    }
    for (auto& th : threads5) th.join();
    for (auto& e : errors5) {
      if (e) std::rethrow_exception(e);
    }
  } catch (const std::exception& e) {
    report(6, false, std::string("in-process consistency failed: ") + e.what());
    return;
  }

  // tcp: same protocol across processes
  auto tcp_worker = [&](std::uint32_t n_units, auto scenario) {
    RendezvousServer rendezvous(n_units);
    std::vector<pid_t> pids;
    for (std::uint32_t u = 0; u < n_units; ++u) {
      pid_t pid = ::fork();
      if (pid < 0) throw error("fork failed");
      if (pid == 0) {
        int code = 0;
        try {
          TcpTransport t(UnitId{u}, n_units, rendezvous.address(), 15000);
          std::uint64_t epoch = 0;
          auto sync = [&] {
            ++epoch;
            for (std::uint32_t k = 0, step = 1; step < n_units; ++k, step <<= 1) {
              CtrlTag tag = make_ctrl_tag(7, epoch, CtrlPhase::Barrier, k);
              t.send_ctrl(UnitId{(u + step) % n_units}, tag, {});
              t.recv_ctrl(UnitId{(u + n_units - step) % n_units}, tag);
            }
          };
          try {
            scenario(t, std::function<void()>(sync));
          } catch (const std::exception& e) {
            std::fprintf(stderr, "[criterion6 unit %u] %s\n", u, e.what());
            code = 1;
          }
          sync();
          t.shutdown();
        } catch (const std::exception& e) {
          std::fprintf(stderr, "[criterion6 unit %u] startup: %s\n", u, e.what());
          code = 2;
        }
        std::fflush(nullptr);
        ::_exit(code);
      }
      pids.push_back(pid);
    }
    rendezvous.serve();
    bool ok = true;
    for (auto pid : pids) {
      int st = 0;
      ::waitpid(pid, &st, 0);
      ok = ok && WIFEXITED(st) && WEXITSTATUS(st) == 0;
    }
    return ok;
  };

  bool tcp_ok =
      tcp_worker(4, [&](Transport& t, std::function<void()> sync) {
        run_round_trips(t, sync, kTrialsPerTransport, 23);
      }) &&
      tcp_worker(5, [&](Transport& t, std::function<void()> sync) {
        run_torn_read_stress(t, sync, kStressSeconds);
      });
  if (!tcp_ok) {
    report(6, false, "tcp consistency failed (see stderr)");
    return;
  }
  report(6, true,
         "10^4 put->flush->get round trips byte-exact across both transports; zero torn "
         "reads in 10 s of 4-writer stress on aligned 8-byte elements");
}

// ---- criterion 7: transport equivalence --------------------------------------

void criterion7() {
  std::string detail;
  bool ok = run_algorithm_suite(/*use_processes=*/true, 100, detail);
  report(7, ok, "tcp transport: " + detail);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--golden-dir") == 0) g_golden_dir = argv[i + 1];
  }

  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  std::printf("SKIP criterion 8: excluded by design (NPB DT and LULESH speedup tables need "
              "external reference codes and cluster hardware)\n");

  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all runnable criteria passed\n");
  return 0;
}
