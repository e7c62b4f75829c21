#pragma once

#include <string>
#include <vector>

#include "sanex/agent.hpp"

namespace sanex {

// Shortest round-trip text for a double (and exact parse back).
std::string fmt_double(double v);
double parse_double(const std::string& s);

// Columns, exact order:
// step,episode,episode_return,loss,mean_abs_sigma,kl_term,wallclock_ms
void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path);

// Flat `key = value` grammar with `#` comments; keys match TrainConfig
// field names. Unknown keys are errors.
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config(const std::string& path);
std::string config_to_text(const TrainConfig& cfg);

inline constexpr const char* kCheckpointMagic = "SANEX-CKPT-v1";

// Versioned structured-text checkpoint; load(save(x)) is bitwise identity.
void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(const std::string& path);

}  // namespace sanex
