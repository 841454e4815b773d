// SPMD program launcher: spawns N units as processes (tcp transport, with a
// built-in rendezvous) or hands the unit count to a single process that runs
// its units as threads.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pgas/tcp_transport.hpp"

namespace {

int launch_processes(std::uint32_t units, const std::string& rendezvous_opt,
                     const std::string& locality, char** child_argv) {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  if (!rendezvous_opt.empty()) {
    auto colon = rendezvous_opt.rfind(':');
    host = rendezvous_opt.substr(0, colon == std::string::npos ? rendezvous_opt.size() : colon);
    if (colon != std::string::npos)
      port = static_cast<std::uint16_t>(std::atoi(rendezvous_opt.c_str() + colon + 1));
  }
  pgas::RendezvousServer rendezvous(units, host, port);

  std::vector<pid_t> pids;
  for (std::uint32_t u = 0; u < units; ++u) {
    pid_t pid = ::fork();
    if (pid < 0) {
      std::perror("fork");
      return 2;
    }
    if (pid == 0) {
      ::setenv("PGAS_TRANSPORT", "tcp", 1);
      ::setenv("PGAS_UNIT_ID", std::to_string(u).c_str(), 1);
      ::setenv("PGAS_N_UNITS", std::to_string(units).c_str(), 1);
      ::setenv("PGAS_RENDEZVOUS", rendezvous.address().c_str(), 1);
      if (!locality.empty()) ::setenv("PGAS_LOCALITY", locality.c_str(), 1);
      ::execvp(child_argv[0], child_argv);
      std::perror(child_argv[0]);
      ::_exit(127);
    }
    pids.push_back(pid);
  }

  int exit_code = 0;
  try {
    rendezvous.serve();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "launch: rendezvous failed: %s\n", e.what());
    exit_code = 2;
  }
  for (auto pid : pids) {
    int st = 0;
    ::waitpid(pid, &st, 0);
    int code = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
    exit_code = std::max(exit_code, code);
  }
  return exit_code;
}

int launch_threads(std::uint32_t units, const std::string& locality, char** child_argv) {
  pid_t pid = ::fork();
  if (pid < 0) {
    std::perror("fork");
    return 2;
  }
  if (pid == 0) {
    ::setenv("PGAS_TRANSPORT", "thread", 1);
    ::setenv("PGAS_N_UNITS", std::to_string(units).c_str(), 1);
    ::unsetenv("PGAS_UNIT_ID");
    if (!locality.empty()) ::setenv("PGAS_LOCALITY", locality.c_str(), 1);
    ::execvp(child_argv[0], child_argv);
    std::perror(child_argv[0]);
    ::_exit(127);
  }
  int st = 0;
  ::waitpid(pid, &st, 0);
  return WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
}

}  // namespace

int main(int argc, char** argv) {
  // Everything after "--" belongs to the launched program.
  int split = argc;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--") == 0) {
      split = i;
      break;
    }
  }
  if (split == argc || split + 1 == argc) {
    std::fprintf(stderr,
                 "usage: launch --units N --transport {thread|process} "
                 "[--rendezvous HOST:PORT] [--locality FILE] -- <program> [args]\n");
    return 2;
  }

  CLI::App app{"SPMD launcher"};
  std::uint32_t units = 1;
  std::string transport = "thread";
  std::string rendezvous;
  std::string locality;
  app.add_option("--units", units, "number of units")->required();
  app.add_option("--transport", transport, "thread or process")
      ->check(CLI::IsMember({"thread", "process"}));
  app.add_option("--rendezvous", rendezvous, "rendezvous bind address (process transport)");
  app.add_option("--locality", locality, "locality map file (nested JSON arrays)")
      ->check(CLI::ExistingFile);
  CLI11_PARSE(app, split, argv);

  if (units == 0) {
    std::fprintf(stderr, "launch: --units must be at least 1\n");
    return 2;
  }

  char** child_argv = argv + split + 1;
  return transport == "process" ? launch_processes(units, rendezvous, locality, child_argv)
                                : launch_threads(units, locality, child_argv);
}
