#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uarl/agents.hpp"
#include "uarl/client.hpp"

namespace uarl {

class EmptySpaceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class StepTimeoutError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class EnvError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One marked node's contribution to a space: where it lives and its
/// enumerated value grid.
struct NodeBinding {
    size_t server_index = 0;
    NodeId node;
    std::string browse_name;
    std::vector<Value> values;
};

/// An ordered product of node bindings. Flat indices convert to value tuples
/// mixed-radix, first binding most significant.
class SpaceSpec {
  public:
    SpaceSpec() = default;
    explicit SpaceSpec(std::vector<NodeBinding> bindings);

    size_t size() const { return size_; }
    const std::vector<NodeBinding>& bindings() const { return bindings_; }

    std::vector<Value> index_to_values(size_t index) const;
    size_t values_to_index(const std::vector<Value>& values) const;

    /// "RotateTable×BeltDirection"
    std::string label() const;

  private:
    std::vector<NodeBinding> bindings_;
    size_t size_ = 0;
};

/// Derives the spaces from browsed catalogs: servers in configuration order,
/// nodes in catalog order; action markers feed the action space, observation
/// markers the observation space, each node contributing its min:step:max
/// grid to the Cartesian product.
std::pair<SpaceSpec, SpaceSpec> discover_spaces(
    const std::vector<std::vector<CatalogEntry>>& catalogs);

/// Fires when a subscribed node takes the trigger value; first matching rule
/// wins per notification.
struct RewardRule {
    size_t server_index = 0;
    NodeId node;
    Value trigger;
    double reward = 0.0;
    bool terminal = false;
    std::string outcome;  // label for the episode log
};

/// A reward rule naming its node by browse name, resolved against the
/// catalogs after discovery.
struct NamedRewardRule {
    size_t server_index = 0;
    std::string node_name;
    Value trigger;
    double reward = 0.0;
    bool terminal = false;
    std::string outcome;
};

std::vector<RewardRule> resolve_reward_rules(
    const std::vector<std::vector<CatalogEntry>>& catalogs,
    const std::vector<NamedRewardRule>& named);

struct EpisodeResult {
    double episode_return = 0.0;
    size_t steps = 0;
    std::string outcome;
};

struct EnvOptions {
    std::chrono::milliseconds step_timeout{5000};
    size_t max_steps = 20;
};

/// The translation layer between the agent and the node servers: action
/// indices become actuator writes, sensor notifications become state
/// transitions and rewards, episodes run against the Reset method.
/// Single-threaded orchestration; one in-flight action at a time.
class Environment {
  public:
    Environment(std::vector<std::unique_ptr<ClientSession>> sessions,
                EnvOptions options = {});

    /// Browses every server and derives the action/observation spaces.
    void discover();

    void set_reward_rules(std::vector<RewardRule> rules) { rules_ = std::move(rules); }

    /// Subscribes to all observation and reward-rule nodes and locates each
    /// server's Reset method. Requires discover().
    void start();

    /// Calls Reset everywhere, then reads the full observation vector.
    size_t reset_and_observe();

    /// Writes the action's values in binding order, then consumes
    /// notifications until a reward rule fires (terminal per rule), the
    /// observation settles on a change with no rule match (reward 0), or the
    /// step timeout expires.
    Transition step(size_t action_index);

    EpisodeResult run_episode(Agent& agent);

    /// Re-reads all observation nodes into the cache; returns the state index.
    size_t read_state();

    const std::vector<std::vector<CatalogEntry>>& catalogs() const { return catalogs_; }
    const SpaceSpec& action_space() const { return action_space_; }
    const SpaceSpec& observation_space() const { return observation_space_; }
    size_t current_state() const { return current_state_; }
    const std::string& last_outcome() const { return last_outcome_; }
    ClientSession& session(size_t server_index) { return *sessions_.at(server_index); }
    size_t session_count() const { return sessions_.size(); }

  private:
    struct Pending {
        bool rule_fired = false;
        double reward = 0.0;
        bool terminal = false;
        bool observation_changed = false;
    };

    void apply_notification(size_t server_index, const ClientSession::Notification& n,
                            Pending& pending, bool match_rules);
    bool drain_queues(Pending& pending, bool match_rules);
    size_t state_from_cache() const;

    std::vector<std::unique_ptr<ClientSession>> sessions_;
    EnvOptions options_;
    std::vector<std::vector<CatalogEntry>> catalogs_;
    SpaceSpec action_space_;
    SpaceSpec observation_space_;
    std::vector<RewardRule> rules_;
    std::vector<std::optional<NodeId>> reset_methods_;  // per server
    std::map<std::pair<size_t, NodeId>, Value> cache_;
    size_t current_state_ = 0;
    std::string last_outcome_;
    bool started_ = false;
};

}  // namespace uarl
