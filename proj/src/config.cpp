#include "uarl/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace uarl {

using nlohmann::json;

std::vector<NamedRewardRule> default_sorting_rules() {
    return {
        {0, "LeftStationColor", Value::int32(1), +5.0, true, "correct"},
        {0, "RightStationColor", Value::int32(2), +5.0, true, "correct"},
        {0, "LeftStationColor", Value::int32(2), -1.0, true, "wrong"},
        {0, "RightStationColor", Value::int32(1), -1.0, true, "wrong"},
        {0, "LightGrid", Value::int32(1), -3.0, true, "dropped"},
        {0, "StuckDetected", Value::int32(1), -5.0, true, "stuck"},
    };
}

namespace {

Value value_from_json(const json& j) {
    if (j.is_boolean()) return Value::boolean(j.get<bool>());
    if (j.is_number_integer()) return Value::int32(j.get<int32_t>());
    if (j.is_number_float()) return Value::real(j.get<double>());
    if (j.is_string()) return Value::text(j.get<std::string>());
    throw ConfigError("trigger must be a bool, number or string");
}

NamedRewardRule rule_from_json(const json& j) {
    NamedRewardRule rule;
    rule.server_index = j.value("server", 0);
    if (!j.contains("node") || !j["node"].is_string())
        throw ConfigError("reward rule needs a \"node\" browse name");
    rule.node_name = j["node"].get<std::string>();
    if (!j.contains("trigger")) throw ConfigError("reward rule needs a \"trigger\"");
    rule.trigger = value_from_json(j["trigger"]);
    if (!j.contains("reward") || !j["reward"].is_number())
        throw ConfigError("reward rule needs a numeric \"reward\"");
    rule.reward = j["reward"].get<double>();
    rule.terminal = j.value("terminal", true);
    rule.outcome = j.value("outcome", "");
    return rule;
}

}  // namespace

TrainConfig parse_train_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    TrainConfig config;
    try {
        if (j.contains("endpoints")) {
            config.endpoints.clear();
            for (const auto& ep : j["endpoints"]) config.endpoints.push_back(ep.get<std::string>());
        }
        if (j.contains("agent")) {
            const auto& a = j["agent"];
            config.agent.type = a.value("type", config.agent.type);
            config.agent.alpha = a.value("alpha", config.agent.alpha);
            config.agent.gamma = a.value("gamma", config.agent.gamma);
            config.agent.epsilon = a.value("epsilon", config.agent.epsilon);
            config.agent.seed = a.value("seed", config.agent.seed);
        }
        config.episodes = j.value("episodes", config.episodes);
        config.max_steps = j.value("max_steps", config.max_steps);
        config.step_timeout_ms = j.value("step_timeout", config.step_timeout_ms);
        if (j.contains("reward_rules"))
            for (const auto& r : j["reward_rules"]) config.reward_rules.push_back(rule_from_json(r));
        config.log_path = j.value("log_path", config.log_path);
        config.qtable_path = j.value("qtable_path", config.qtable_path);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config field: ") + e.what());
    }
    return config;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_train_config(buf.str());
}

void validate(const TrainConfig& config) {
    if (config.endpoints.empty()) throw ConfigError("endpoints must be non-empty");
    if (config.episodes < 1) throw ConfigError("episodes must be >= 1");
    if (config.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (config.step_timeout_ms <= 0) throw ConfigError("step_timeout must be positive");
    const auto& a = config.agent;
    if (a.type != "qlearning" && a.type != "random")
        throw ConfigError("agent.type must be qlearning or random: " + a.type);
    if (!(a.epsilon >= 0.0 && a.epsilon <= 1.0))
        throw ConfigError("epsilon must be in [0, 1]");
    if (!(a.gamma > 0.0 && a.gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
    if (!(a.alpha > 0.0 && a.alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
}

std::vector<NamedRewardRule> effective_rules(const TrainConfig& config) {
    return config.reward_rules.empty() ? default_sorting_rules() : config.reward_rules;
}

}  // namespace uarl
