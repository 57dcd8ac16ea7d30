#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "uarl/mapper.hpp"

namespace uarl {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct AgentConfig {
    std::string type = "qlearning";  // qlearning | random
    double alpha = 0.4;
    double gamma = 0.9;
    double epsilon = 0.1;
    uint64_t seed = 1;
};

/// One experiment, file-loadable as JSON; command-line flags override file
/// values field by field.
struct TrainConfig {
    std::vector<std::string> endpoints{"127.0.0.1:4850"};
    AgentConfig agent;
    size_t episodes = 150;
    size_t max_steps = 20;
    int step_timeout_ms = 5000;
    std::vector<NamedRewardRule> reward_rules;  // empty = default sorting rules
    std::string log_path = "episodes.csv";
    std::string qtable_path = "qtable.csv";
};

/// The sorting task's reward table: +5 correct station, -1 wrong station,
/// -3 dropped, -5 stuck. Assumes the plant's default green->left routing.
std::vector<NamedRewardRule> default_sorting_rules();

TrainConfig load_train_config(const std::string& path);       // throws ConfigError
TrainConfig parse_train_config(const std::string& json_text); // throws ConfigError

/// Bounds checks: episodes >= 1, 0 <= epsilon <= 1, 0 < gamma < 1,
/// 0 < alpha <= 1, known agent type, non-empty endpoints.
void validate(const TrainConfig& config);  // throws ConfigError

/// Effective rule set: configured rules, or the default sorting table.
std::vector<NamedRewardRule> effective_rules(const TrainConfig& config);

}  // namespace uarl
