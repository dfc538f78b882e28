#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "playtrack/association.hpp"
#include "playtrack/errors.hpp"
#include "playtrack/motion_model.hpp"
#include "playtrack/simulator.hpp"
#include "playtrack/track_manager.hpp"
#include "playtrack/trainer.hpp"

namespace playtrack {

/// Every tunable of a run, grouped by the module that consumes it.
struct RunConfig {
    ModelConfig model;
    TrainConfig trainer;
    AssociationConfig association;
    TrackerConfig tracker;
    Scenario simulator;

    /// Validates every section; throws UsageError naming the offending section.
    void validate() const;
};

/// One documented configuration key.
struct ConfigKey {
    std::string section;
    std::string name;
    std::string description;
};

/// All accepted keys in file order.
const std::vector<ConfigKey>& config_keys();

/// INI-style text: `[section]` headers, `key = value` lines, `#` or `;` comments.
/// Unknown keys, bad values and invalid settings throw UsageError with the line number.
RunConfig parse_config(std::istream& in, const std::string& source = "<stream>");
RunConfig load_config(const std::string& path);

/// Sets one key given as "section.key"; throws UsageError on unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value);
[[nodiscard]] std::string get_config_value(const RunConfig& cfg, const std::string& dotted_key);

/// Full configuration as INI text; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& cfg);

}  // namespace playtrack
