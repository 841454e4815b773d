#ifndef PGAS_SPMD_HPP
#define PGAS_SPMD_HPP

#include <functional>
#include <string>
#include <vector>

#include "pgas/config.hpp"
#include "pgas/runtime.hpp"

namespace pgas::spmd {

/// One unit's body. The runtime is initialized before entry and finalized
/// after return (also on exceptions, best effort).
using UnitFn = std::function<void(Runtime&)>;

struct ThreadRunOptions {
  std::optional<LocalityMap> locality_map;
  bool debug_checks = true;
  std::uint32_t rendezvous_timeout_ms = 15000;
};

/// Runs fn on n unit threads over the in-process transport; rethrows the
/// first unit's exception after all threads joined.
void run_threads(std::uint32_t n, const UnitFn& fn, const ThreadRunOptions& opts = {});

/// Like run_threads but returns one exception slot per unit (null = clean).
std::vector<std::exception_ptr> run_threads_collect(std::uint32_t n, const UnitFn& fn,
                                                    const ThreadRunOptions& opts = {});

struct ProcessRunOptions {
  bool debug_checks = true;
  std::uint32_t rendezvous_timeout_ms = 15000;
  std::optional<LocalityMap> locality_map;
};

/// Forks n child processes running fn over the tcp transport, serves the
/// rendezvous in the parent and waits for all children. Returns each child's
/// exit status (0 = clean). Must be called before the parent spawns threads.
std::vector<int> run_processes(std::uint32_t n, const UnitFn& fn,
                               const ProcessRunOptions& opts = {});

/// Entry-point helper for standalone SPMD programs: under the launcher's
/// tcp mode (PGAS_UNIT_ID set) runs fn once in this process; otherwise runs
/// PGAS_N_UNITS unit threads in-process. Returns the max unit exit code.
int run_main(int argc, char** argv, const std::function<int(Runtime&, int, char**)>& fn);

}  // namespace pgas::spmd

#endif  // PGAS_SPMD_HPP
