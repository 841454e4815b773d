#include "pgas/spmd.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <thread>

#include "pgas/inproc_transport.hpp"
#include "pgas/tcp_transport.hpp"

namespace pgas::spmd {

std::vector<std::exception_ptr> run_threads_collect(std::uint32_t n, const UnitFn& fn,
                                                    const ThreadRunOptions& opts) {
  auto group = std::make_shared<InProcessGroup>(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    threads.emplace_back([&, u] {
      try {
        RuntimeConfig cfg;
        cfg.n_units = n;
        cfg.transport_kind = TransportKind::InProcess;
        cfg.unit = UnitId{u};
        cfg.group = group;
        cfg.locality_map = opts.locality_map;
        cfg.debug_checks = opts.debug_checks;
        cfg.rendezvous_timeout_ms = opts.rendezvous_timeout_ms;
        Runtime& rt = init(cfg);
        try {
          fn(rt);
        } catch (...) {
          errors[u] = std::current_exception();
          // Unblock peers stuck in collectives with this unit.
          rt.transport().send_poison(rt.my_id(), "peer unit failed");
          for (auto m : rt.team_all().members()) {
            if (m != rt.my_id().value)
              rt.transport().send_poison(UnitId{m}, "peer unit " +
                                                        std::to_string(rt.my_id().value) +
                                                        " failed");
          }
        }
        if (initialized()) {
          try {
            finalize();
          } catch (...) {
            if (!errors[u]) errors[u] = std::current_exception();
          }
        }
      } catch (...) {
        errors[u] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  return errors;
}

void run_threads(std::uint32_t n, const UnitFn& fn, const ThreadRunOptions& opts) {
  auto errors = run_threads_collect(n, fn, opts);
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<int> run_processes(std::uint32_t n, const UnitFn& fn, const ProcessRunOptions& opts) {
  RendezvousServer rendezvous(n);
  std::vector<pid_t> pids;
  pids.reserve(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    pid_t pid = ::fork();
    if (pid < 0) throw startup_error("fork failed");
    if (pid == 0) {
      int code = 0;
      try {
        RuntimeConfig cfg;
        cfg.n_units = n;
        cfg.transport_kind = TransportKind::TcpProcess;
        cfg.unit = UnitId{u};
        cfg.rendezvous = rendezvous.address();
        cfg.locality_map = opts.locality_map;
        cfg.debug_checks = opts.debug_checks;
        cfg.rendezvous_timeout_ms = opts.rendezvous_timeout_ms;
        Runtime& rt = init(cfg);
        try {
          fn(rt);
        } catch (const std::exception& e) {
          std::fprintf(stderr, "[unit %u] error: %s\n", u, e.what());
          code = 1;
          rt.transport().send_poison(rt.my_id(), "peer unit failed");
          for (auto m : rt.team_all().members()) {
            if (m != u) rt.transport().send_poison(UnitId{m}, "peer unit failed");
          }
        }
        if (initialized()) {
          try {
            finalize();
          } catch (const std::exception& e) {
            if (code == 0) {
              std::fprintf(stderr, "[unit %u] finalize error: %s\n", u, e.what());
              code = 1;
            }
          }
        }
      } catch (const std::exception& e) {
        std::fprintf(stderr, "[unit %u] startup error: %s\n", u, e.what());
        code = 2;
      }
      std::fflush(nullptr);
      ::_exit(code);
    }
    pids.push_back(pid);
  }

  std::vector<int> statuses(n, -1);
  try {
    rendezvous.serve();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rendezvous failed: %s\n", e.what());
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    int st = 0;
    ::waitpid(pids[u], &st, 0);
    statuses[u] = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
  }
  return statuses;
}

int run_main(int argc, char** argv, const std::function<int(Runtime&, int, char**)>& fn) {
  try {
    RuntimeConfig cfg = RuntimeConfig::from_env();
    if (cfg.transport_kind == TransportKind::TcpProcess) {
      Runtime& rt = init(cfg);
      int code = fn(rt, argc, argv);
      finalize();
      return code;
    }
    std::atomic<int> max_code{0};
    run_threads(
        cfg.n_units,
        [&](Runtime& rt) {
          int code = fn(rt, argc, argv);
          int cur = max_code.load();
          while (code > cur && !max_code.compare_exchange_weak(cur, code)) {
          }
        },
        {cfg.locality_map, cfg.debug_checks, cfg.rendezvous_timeout_ms});
    return max_code.load();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace pgas::spmd
