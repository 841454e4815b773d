#ifndef PGAS_CONFIG_HPP
#define PGAS_CONFIG_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "pgas/locality.hpp"
#include "pgas/types.hpp"

namespace pgas {

class InProcessGroup;

enum class TransportKind : std::uint8_t {
  InProcess,   // units are threads of one process
  TcpProcess,  // units are processes connected over TCP
};

/// Everything one unit needs to join a program run.
struct RuntimeConfig {
  std::uint32_t n_units = 1;
  TransportKind transport_kind = TransportKind::InProcess;
  UnitId unit{0};

  /// launcher rendezvous address, "host:port" (tcp only)
  std::string rendezvous;
  std::optional<LocalityMap> locality_map;

  /// Shared bootstrap object for the in-process backend; created by
  /// spmd::run_threads and handed to every unit thread.
  std::shared_ptr<InProcessGroup> group;

  /// Attach collective argument hashes and extra precondition checks.
  bool debug_checks = true;

  std::uint32_t rendezvous_timeout_ms = 15000;

  /// Builds a config from the PGAS_* environment variables set by the
  /// launcher: PGAS_UNIT_ID, PGAS_N_UNITS, PGAS_RENDEZVOUS, PGAS_TRANSPORT,
  /// PGAS_LOCALITY.
  static RuntimeConfig from_env();
};

}  // namespace pgas

#endif  // PGAS_CONFIG_HPP
