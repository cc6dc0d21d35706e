#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace fc {

struct ExperimentResult {
    nlohmann::ordered_json summary;
    bool pass = false;
};

const std::vector<std::string>& experiment_names();

// Runs one named experiment: writes CSV artifacts plus summary.json into
// out_dir and returns the summary.  Throws ConfigError for bad inputs.
ExperimentResult run_experiment(const std::string& name, Config cfg,
                                const std::string& out_dir);

}  // namespace fc
