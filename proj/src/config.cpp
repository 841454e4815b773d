#include "pgas/config.hpp"

#include <cstdlib>

namespace pgas {

namespace {

const char* env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

}  // namespace

RuntimeConfig RuntimeConfig::from_env() {
  RuntimeConfig cfg;
  cfg.n_units = static_cast<std::uint32_t>(std::strtoul(env_or("PGAS_N_UNITS", "1"), nullptr, 10));
  if (cfg.n_units == 0) throw usage_error("PGAS_N_UNITS must be at least 1");

  std::string transport = env_or("PGAS_TRANSPORT", "thread");
  if (transport == "tcp" || transport == "process") {
    cfg.transport_kind = TransportKind::TcpProcess;
    const char* uid = std::getenv("PGAS_UNIT_ID");
    if (!uid) throw usage_error("PGAS_UNIT_ID not set for the tcp transport");
    cfg.unit = UnitId{static_cast<std::uint32_t>(std::strtoul(uid, nullptr, 10))};
    cfg.rendezvous = env_or("PGAS_RENDEZVOUS", "");
    if (cfg.rendezvous.empty())
      throw usage_error("PGAS_RENDEZVOUS not set for the tcp transport");
  } else if (transport == "thread") {
    cfg.transport_kind = TransportKind::InProcess;
  } else {
    throw usage_error("unknown PGAS_TRANSPORT value '" + transport + "'");
  }

  if (const char* loc = std::getenv("PGAS_LOCALITY")) {
    cfg.locality_map = LocalityMap::load_file(loc, cfg.n_units);
  }
  return cfg;
}

}  // namespace pgas
