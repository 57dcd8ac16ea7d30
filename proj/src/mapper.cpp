#include "uarl/mapper.hpp"

#include <algorithm>

#include "uarl/log.hpp"

namespace uarl {

SpaceSpec::SpaceSpec(std::vector<NodeBinding> bindings) : bindings_(std::move(bindings)) {
    if (bindings_.empty()) {
        size_ = 0;
        return;
    }
    size_ = 1;
    for (const auto& b : bindings_) {
        if (b.values.empty())
            throw EmptySpaceError("binding with no values: " + b.node.to_string());
        size_ *= b.values.size();
    }
}

std::vector<Value> SpaceSpec::index_to_values(size_t index) const {
    if (index >= size_)
        throw std::out_of_range("space index " + std::to_string(index) +
                                " out of range (size " + std::to_string(size_) + ")");
    // first binding most significant
    std::vector<Value> out(bindings_.size(), Value{});
    size_t rest = index;
    for (size_t i = bindings_.size(); i-- > 0;) {
        size_t radix = bindings_[i].values.size();
        out[i] = bindings_[i].values[rest % radix];
        rest /= radix;
    }
    return out;
}

size_t SpaceSpec::values_to_index(const std::vector<Value>& values) const {
    if (values.size() != bindings_.size())
        throw std::invalid_argument("value tuple arity mismatch");
    size_t index = 0;
    for (size_t i = 0; i < bindings_.size(); ++i) {
        const auto& grid = bindings_[i].values;
        auto it = std::find(grid.begin(), grid.end(), values[i]);
        if (it == grid.end())
            throw std::invalid_argument("value not in binding grid: " +
                                        values[i].to_string());
        index = index * grid.size() + size_t(it - grid.begin());
    }
    return index;
}

std::string SpaceSpec::label() const {
    std::string out;
    for (size_t i = 0; i < bindings_.size(); ++i) {
        if (i) out += "×";
        out += bindings_[i].browse_name;
    }
    return out;
}

std::pair<SpaceSpec, SpaceSpec> discover_spaces(
    const std::vector<std::vector<CatalogEntry>>& catalogs) {
    std::vector<NodeBinding> actions, observations;
    for (size_t server = 0; server < catalogs.size(); ++server) {
        for (const auto& entry : catalogs[server]) {
            if (!entry.marker) continue;
            NodeBinding binding{server, entry.id, entry.browse_name,
                                enumerate_values(*entry.marker)};
            if (entry.marker->is_action())
                actions.push_back(std::move(binding));
            else
                observations.push_back(std::move(binding));
        }
    }
    if (actions.empty())
        throw EmptySpaceError("no action-marked nodes discovered");
    if (observations.empty())
        throw EmptySpaceError("no observation-marked nodes discovered");
    return {SpaceSpec(std::move(actions)), SpaceSpec(std::move(observations))};
}

std::vector<RewardRule> resolve_reward_rules(
    const std::vector<std::vector<CatalogEntry>>& catalogs,
    const std::vector<NamedRewardRule>& named) {
    std::vector<RewardRule> out;
    out.reserve(named.size());
    for (const auto& rule : named) {
        if (rule.server_index >= catalogs.size())
            throw EnvError("reward rule server index out of range: " +
                           std::to_string(rule.server_index));
        const CatalogEntry* found = nullptr;
        for (const auto& entry : catalogs[rule.server_index])
            if (entry.browse_name == rule.node_name) {
                found = &entry;
                break;
            }
        if (!found)
            throw EnvError("reward rule node not found on server " +
                           std::to_string(rule.server_index) + ": " + rule.node_name);
        out.push_back(RewardRule{rule.server_index, found->id, rule.trigger,
                                 rule.reward, rule.terminal, rule.outcome});
    }
    return out;
}

Environment::Environment(std::vector<std::unique_ptr<ClientSession>> sessions,
                         EnvOptions options)
    : sessions_(std::move(sessions)), options_(options) {
    if (sessions_.empty()) throw EnvError("no sessions");
}

void Environment::discover() {
    catalogs_.clear();
    catalogs_.reserve(sessions_.size());
    for (auto& session : sessions_) catalogs_.push_back(session->browse_all());
    auto [actions, observations] = discover_spaces(catalogs_);
    action_space_ = std::move(actions);
    observation_space_ = std::move(observations);
}

void Environment::start() {
    if (action_space_.size() == 0) throw EnvError("discover() must run first");

    // per-server subscription over observation bindings + rule nodes
    for (size_t server = 0; server < sessions_.size(); ++server) {
        std::vector<NodeId> nodes;
        for (const auto& b : observation_space_.bindings())
            if (b.server_index == server) nodes.push_back(b.node);
        for (const auto& r : rules_)
            if (r.server_index == server &&
                std::find(nodes.begin(), nodes.end(), r.node) == nodes.end())
                nodes.push_back(r.node);
        if (!nodes.empty()) sessions_[server]->subscribe(nodes);
    }

    reset_methods_.assign(sessions_.size(), std::nullopt);
    bool any_reset = false;
    for (size_t server = 0; server < sessions_.size(); ++server) {
        for (const auto& entry : catalogs_[server])
            if (entry.node_class == NodeClass::Method && entry.browse_name == "Reset") {
                reset_methods_[server] = entry.id;
                any_reset = true;
                break;
            }
    }
    if (!any_reset) throw EnvError("no Reset method on any server");
    started_ = true;
}

size_t Environment::read_state() {
    for (const auto& b : observation_space_.bindings())
        cache_[{b.server_index, b.node}] = sessions_[b.server_index]->read(b.node);
    current_state_ = state_from_cache();
    return current_state_;
}

size_t Environment::state_from_cache() const {
    std::vector<Value> values;
    values.reserve(observation_space_.bindings().size());
    for (const auto& b : observation_space_.bindings()) {
        auto it = cache_.find({b.server_index, b.node});
        if (it == cache_.end())
            throw EnvError("observation cache incomplete: " + b.node.to_string());
        values.push_back(it->second);
    }
    return observation_space_.values_to_index(values);
}

void Environment::apply_notification(size_t server_index,
                                     const ClientSession::Notification& n,
                                     Pending& pending, bool match_rules) {
    // cache update for observation bindings (notifications only arrive on
    // actual change, so any hit is a change)
    for (const auto& b : observation_space_.bindings()) {
        if (b.server_index == server_index && b.node == n.node) {
            cache_[{server_index, n.node}] = n.value;
            pending.observation_changed = true;
            break;
        }
    }
    if (!match_rules) return;
    for (const auto& rule : rules_) {
        if (rule.server_index != server_index || rule.node != n.node) continue;
        if (rule.trigger != n.value) continue;
        pending.rule_fired = true;
        pending.reward = rule.reward;
        pending.terminal = rule.terminal;
        last_outcome_ = rule.outcome;
        return;  // first match wins
    }
}

bool Environment::drain_queues(Pending& pending, bool match_rules) {
    bool consumed = false;
    for (size_t server = 0; server < sessions_.size(); ++server) {
        while (auto n = sessions_[server]->try_pop_notification()) {
            consumed = true;
            apply_notification(server, *n, pending, match_rules);
            if (pending.rule_fired) return consumed;
        }
    }
    return consumed;
}

size_t Environment::reset_and_observe() {
    if (!started_) throw EnvError("start() must run first");
    for (size_t server = 0; server < sessions_.size(); ++server) {
        if (!reset_methods_[server]) continue;
        auto [status, results] = sessions_[server]->call(*reset_methods_[server], {});
        if (status != 0)
            throw EnvError("Reset failed on server " + std::to_string(server) +
                           " (status " + std::to_string(status) + ")");
    }
    // the reset emissions are already queued (they precede the CallResp);
    // absorb them as cache updates without reward matching
    Pending ignore;
    drain_queues(ignore, /*match_rules=*/false);
    last_outcome_.clear();
    return read_state();
}

Transition Environment::step(size_t action_index) {
    if (!started_) throw EnvError("start() must run first");
    const auto deadline = std::chrono::steady_clock::now() + options_.step_timeout;

    // f: action index -> actuator writes, binding order
    const auto values = action_space_.index_to_values(action_index);
    const auto& bindings = action_space_.bindings();
    for (size_t i = 0; i < bindings.size(); ++i) {
        uint8_t status = sessions_[bindings[i].server_index]->write(bindings[i].node, values[i]);
        if (status != 0)
            throw EnvError("actuator write rejected with status " +
                           std::to_string(status) + " on " +
                           bindings[i].node.to_string());
    }

    Pending pending;
    last_outcome_.clear();
    for (;;) {
        drain_queues(pending, /*match_rules=*/true);
        if (pending.rule_fired) break;
        auto now = std::chrono::steady_clock::now();
        if (pending.observation_changed) {
            // settle: only conclude reward 0 once the bundle is fully drained
            bool idle = true;
            for (auto& session : sessions_)
                if (session->pending_notifications() > 0) idle = false;
            if (idle || now >= deadline) break;
            continue;
        }
        if (now >= deadline)
            throw StepTimeoutError("no sensor change within the step timeout");
        auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
        if (sessions_.size() == 1) {
            auto n = sessions_[0]->await_notification(remaining);
            if (n) apply_notification(0, *n, pending, true);
        } else {
            // round-robin short waits across servers
            for (size_t server = 0; server < sessions_.size() && !pending.rule_fired;
                 ++server) {
                auto n = sessions_[server]->await_notification(std::chrono::milliseconds(1));
                if (n) apply_notification(server, *n, pending, true);
            }
        }
    }

    Transition t;
    t.state = current_state_;
    t.action = action_index;
    t.reward = pending.rule_fired ? pending.reward : 0.0;
    t.terminal = pending.rule_fired && pending.terminal;
    t.next_state = state_from_cache();
    current_state_ = t.next_state;
    return t;
}

EpisodeResult Environment::run_episode(Agent& agent) {
    agent.begin_episode();
    reset_and_observe();

    EpisodeResult result;
    for (;;) {
        size_t action = agent.select_action(current_state_);
        Transition t = step(action);
        result.steps += 1;
        result.episode_return += t.reward;
        if (t.terminal) {
            result.outcome = last_outcome_.empty() ? "terminal" : last_outcome_;
        } else if (result.steps >= options_.max_steps) {
            // truncated episodes hand the agent a terminal transition
            t.terminal = true;
            result.outcome = "truncated";
        }
        agent.observe(t);
        if (t.terminal) break;
    }
    return result;
}

}  // namespace uarl
