// Operator surface: serve the simulated plant, inspect a server's address
// space and discovered spaces, train against live servers, evaluate a saved
// policy.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "uarl/agents.hpp"
#include "uarl/client.hpp"
#include "uarl/config.hpp"
#include "uarl/mapper.hpp"
#include "uarl/plant_sim.hpp"

namespace {

using namespace uarl;

volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

constexpr int kExitBind = 2;
constexpr int kExitUnreachable = 3;
constexpr int kExitEmptySpace = 4;
constexpr int kExitConfig = 5;
constexpr int kExitAborted = 6;

// ---------------------------------------------------------------------------
// serve-plant
// ---------------------------------------------------------------------------

int cmd_serve_plant(const std::string& endpoint, uint64_t seed, int stuck_timeout,
                    bool realtime, const std::string& green_station,
                    const std::string& name) {
    PlantServerOptions options;
    try {
        options.endpoint = parse_endpoint(endpoint);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    options.plant.seed = seed;
    options.plant.stuck_timeout = stuck_timeout;
    options.plant.green_to_left = (green_station != "right");
    options.realtime = realtime;
    options.server_name = name;

    PlantServer plant(options);
    try {
        plant.start();
    } catch (const BindError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBind;
    }

    std::printf("uarl plant server listening on %s (seed %llu%s)\n",
                plant.endpoint().to_string().c_str(),
                static_cast<unsigned long long>(seed),
                realtime ? ", realtime" : "");
    std::printf("ready\n");
    std::fflush(stdout);

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    plant.stop();
    std::printf("stopped\n");
    return 0;
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

void print_tree(ClientSession& session, const NodeId& id, const std::string& label,
                int depth, std::set<NodeId>& visited) {
    std::string indent(size_t(depth) * 2, ' ');
    std::printf("%s%s\n", indent.c_str(), label.c_str());
    if (!visited.insert(id).second) return;
    for (const auto& entry : session.browse(id)) {
        if (entry.ref_type == ReferenceType::HasTypeDefinition) continue;
        std::string line = entry.browse_name;
        line += " [" + std::string(node_class_name(entry.node_class)) + "]";
        if (entry.marker) {
            const auto& m = *entry.marker;
            char buf[96];
            std::snprintf(buf, sizeof(buf), " {%s min=%g max=%g step=%g}",
                          marker_kind_name(m.kind), m.min, m.max, m.step);
            line += buf;
        }
        print_tree(session, entry.target, line, depth + 1, visited);
    }
}

int cmd_inspect(const std::string& endpoint) {
    std::unique_ptr<ClientSession> session;
    try {
        session = ClientSession::connect(parse_endpoint(endpoint));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: cannot reach %s: %s\n", endpoint.c_str(), e.what());
        return kExitUnreachable;
    }

    std::printf("%s at %s\n", session->server_name().c_str(), endpoint.c_str());
    try {
        std::set<NodeId> visited;
        print_tree(*session, wellknown::objects, "Objects [Object]", 0, visited);

        auto catalog = session->browse_all();
        auto [actions, observations] = discover_spaces({catalog});
        std::printf("Action space: %zu (%s)\n", actions.size(), actions.label().c_str());
        std::printf("Observation space: %zu (%s)\n", observations.size(),
                    observations.label().c_str());
    } catch (const EmptySpaceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEmptySpace;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUnreachable;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train / eval
// ---------------------------------------------------------------------------

std::unique_ptr<Environment> connect_environment(const TrainConfig& config) {
    std::vector<std::unique_ptr<ClientSession>> sessions;
    for (const auto& ep : config.endpoints)
        sessions.push_back(ClientSession::connect(parse_endpoint(ep)));
    EnvOptions options;
    options.step_timeout = std::chrono::milliseconds(config.step_timeout_ms);
    options.max_steps = config.max_steps;
    auto env = std::make_unique<Environment>(std::move(sessions), options);
    env->discover();
    env->set_reward_rules(resolve_reward_rules(env->catalogs(), effective_rules(config)));
    env->start();
    return env;
}

void print_greedy_policy(const Environment& env, const QLearningAgent& agent) {
    const auto& actions = env.action_space();
    const auto& observations = env.observation_space();
    std::printf("greedy policy:\n");
    auto policy = agent.greedy_policy();
    for (size_t s = 0; s < policy.size(); ++s) {
        auto sv = observations.index_to_values(s);
        auto av = actions.index_to_values(policy[s]);
        std::string lhs, rhs;
        for (size_t i = 0; i < sv.size(); ++i) {
            if (i) lhs += ", ";
            lhs += observations.bindings()[i].browse_name + "=" + sv[i].to_string();
        }
        for (size_t i = 0; i < av.size(); ++i) {
            if (i) rhs += ", ";
            rhs += actions.bindings()[i].browse_name + "=" + av[i].to_string();
        }
        std::printf("  state %zu (%s) -> action %zu (%s)\n", s, lhs.c_str(),
                    policy[s], rhs.c_str());
    }
}

std::string format_return(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

int run_episodes(Environment& env, Agent& agent, size_t episodes,
                 std::ofstream* log, double* mean_return,
                 std::map<std::string, size_t>* outcome_counts) {
    double total = 0.0;
    for (size_t episode = 1; episode <= episodes; ++episode) {
        EpisodeResult result = env.run_episode(agent);
        total += result.episode_return;
        if (outcome_counts) (*outcome_counts)[result.outcome] += 1;
        if (log)
            (*log) << episode << ',' << result.steps << ','
                   << format_return(result.episode_return) << ',' << result.outcome
                   << '\n';
    }
    if (mean_return) *mean_return = total / double(episodes);
    return 0;
}

int cmd_train(const TrainConfig& config) {
    try {
        validate(config);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }

    try {
        auto env = connect_environment(config);
        std::printf("action space: %zu (%s)\n", env->action_space().size(),
                    env->action_space().label().c_str());
        std::printf("observation space: %zu (%s)\n", env->observation_space().size(),
                    env->observation_space().label().c_str());

        std::unique_ptr<Agent> agent;
        QLearningAgent* qagent = nullptr;
        if (config.agent.type == "qlearning") {
            auto q = std::make_unique<QLearningAgent>(
                env->observation_space().size(), env->action_space().size(),
                config.agent.alpha, config.agent.gamma, config.agent.epsilon,
                config.agent.seed);
            qagent = q.get();
            agent = std::move(q);
        } else {
            agent = std::make_unique<RandomAgent>(env->action_space().size(),
                                                  config.agent.seed);
        }

        std::ofstream log(config.log_path);
        if (!log) {
            std::fprintf(stderr, "error: cannot write %s\n", config.log_path.c_str());
            return kExitConfig;
        }
        log << "episode,steps,return,outcome\n";

        double mean = 0.0;
        std::map<std::string, size_t> outcomes;
        run_episodes(*env, *agent, config.episodes, &log, &mean, &outcomes);

        std::printf("episodes: %zu\n", config.episodes);
        std::printf("mean return: %s\n", format_return(mean).c_str());
        std::string counts;
        for (const auto& [name, n] : outcomes)
            counts += (counts.empty() ? "" : " ") + name + "=" + std::to_string(n);
        std::printf("outcomes: %s\n", counts.c_str());

        if (qagent) {
            qagent->save_csv_file(config.qtable_path);
            std::printf("q-table written to %s\n", config.qtable_path.c_str());
            print_greedy_policy(*env, *qagent);
        }
        std::printf("episode log written to %s\n", config.log_path.c_str());
        return 0;
    } catch (const EmptySpaceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEmptySpace;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: training aborted: %s\n", e.what());
        return kExitAborted;
    }
}

int cmd_eval(const TrainConfig& config, const std::string& qtable_path, size_t episodes) {
    try {
        validate(config);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }

    QLearningAgent loaded(1, 1, 0.1, 0.1, 0.0, 0);
    try {
        loaded = QLearningAgent::load_csv_file(qtable_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }

    try {
        auto env = connect_environment(config);
        if (loaded.num_states() != env->observation_space().size() ||
            loaded.num_actions() != env->action_space().size()) {
            std::fprintf(stderr,
                         "error: q-table is %zux%zu but the discovered spaces are %zux%zu\n",
                         loaded.num_states(), loaded.num_actions(),
                         env->observation_space().size(), env->action_space().size());
            return kExitConfig;
        }

        GreedyTableAgent agent(loaded);
        double mean = 0.0;
        std::map<std::string, size_t> outcomes;
        run_episodes(*env, agent, episodes, nullptr, &mean, &outcomes);

        std::printf("episodes: %zu\n", episodes);
        std::printf("mean return: %s\n", format_return(mean).c_str());
        std::string counts;
        for (const auto& [name, n] : outcomes)
            counts += (counts.empty() ? "" : " ") + name + "=" + std::to_string(n);
        std::printf("outcomes: %s\n", counts.c_str());
        return 0;
    } catch (const EmptySpaceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEmptySpace;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: evaluation aborted: %s\n", e.what());
        return kExitAborted;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"node-server RL framework: simulated sorting plant, space "
                 "discovery, tabular training"};
    app.require_subcommand(1);

    // serve-plant
    auto* serve = app.add_subcommand("serve-plant", "run the simulated sorting plant");
    std::string sp_endpoint = "127.0.0.1:4850";
    uint64_t sp_seed = 1;
    int sp_stuck_timeout = 10;
    bool sp_realtime = false;
    std::string sp_green = "left";
    std::string sp_name = "uarl-plant";
    serve->add_option("--endpoint", sp_endpoint, "host:port to listen on");
    serve->add_option("--seed", sp_seed, "material color seed");
    serve->add_option("--stuck-timeout", sp_stuck_timeout, "watchdog units before stuck");
    serve->add_flag("--realtime", sp_realtime, "pace the watchdog in wall-clock seconds");
    serve->add_option("--green-station", sp_green, "correct station for green: left|right")
        ->check(CLI::IsMember({"left", "right"}));
    serve->add_option("--name", sp_name, "server name in the handshake");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print a server's node tree and spaces");
    std::string in_endpoint = "127.0.0.1:4850";
    inspect->add_option("--endpoint", in_endpoint, "server to inspect");

    // shared train/eval config flags
    auto add_config_flags = [](CLI::App* cmd, std::string& config_path,
                               std::vector<std::string>& endpoints, AgentConfig& agent,
                               bool& have_epsilon) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--endpoint", endpoints, "server endpoint(s), overrides config");
        cmd->add_option("--agent", agent.type, "agent type: qlearning|random");
        cmd->add_option("--alpha", agent.alpha, "learning rate");
        cmd->add_option("--gamma", agent.gamma, "discount factor");
        cmd->add_option("--epsilon", agent.epsilon, "exploration probability")
            ->each([&](const std::string&) { have_epsilon = true; });
        cmd->add_option("--seed", agent.seed, "agent seed");
    };

    // train
    auto* train = app.add_subcommand("train", "train an agent and save artifacts");
    std::string tr_config_path;
    std::vector<std::string> tr_endpoints;
    AgentConfig tr_agent;
    bool tr_have_epsilon = false;
    size_t tr_episodes = 0;
    size_t tr_max_steps = 0;
    int tr_step_timeout = 0;
    std::string tr_log, tr_qtable;
    add_config_flags(train, tr_config_path, tr_endpoints, tr_agent, tr_have_epsilon);
    train->add_option("--episodes", tr_episodes, "training episodes");
    train->add_option("--max-steps", tr_max_steps, "episode step cap");
    train->add_option("--step-timeout-ms", tr_step_timeout, "sensor-change timeout");
    train->add_option("--log", tr_log, "episode CSV path");
    train->add_option("--qtable", tr_qtable, "Q-table CSV path");

    // eval
    auto* eval = app.add_subcommand("eval", "run a saved Q-table greedily");
    std::string ev_config_path;
    std::vector<std::string> ev_endpoints;
    AgentConfig ev_agent;
    bool ev_have_epsilon = false;
    std::string ev_qtable = "qtable.csv";
    size_t ev_episodes = 100;
    add_config_flags(eval, ev_config_path, ev_endpoints, ev_agent, ev_have_epsilon);
    eval->add_option("--qtable", ev_qtable, "Q-table CSV to load");
    eval->add_option("--episodes", ev_episodes, "evaluation episodes");

    CLI11_PARSE(app, argc, argv);

    if (serve->parsed())
        return cmd_serve_plant(sp_endpoint, sp_seed, sp_stuck_timeout, sp_realtime,
                               sp_green, sp_name);
    if (inspect->parsed()) return cmd_inspect(in_endpoint);

    auto build_config = [&](const std::string& config_path, CLI::App* cmd,
                            const std::vector<std::string>& endpoints,
                            const AgentConfig& agent_flags, bool have_epsilon,
                            TrainConfig& out) -> bool {
        try {
            if (!config_path.empty()) out = load_train_config(config_path);
        } catch (const ConfigError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return false;
        }
        if (!endpoints.empty()) out.endpoints = endpoints;
        if (cmd->count("--agent")) out.agent.type = agent_flags.type;
        if (cmd->count("--alpha")) out.agent.alpha = agent_flags.alpha;
        if (cmd->count("--gamma")) out.agent.gamma = agent_flags.gamma;
        if (have_epsilon) out.agent.epsilon = agent_flags.epsilon;
        if (cmd->count("--seed")) out.agent.seed = agent_flags.seed;
        return true;
    };

    if (train->parsed()) {
        TrainConfig config;
        if (!build_config(tr_config_path, train, tr_endpoints, tr_agent, tr_have_epsilon,
                          config))
            return kExitConfig;
        if (train->count("--episodes")) config.episodes = tr_episodes;
        if (train->count("--max-steps")) config.max_steps = tr_max_steps;
        if (train->count("--step-timeout-ms")) config.step_timeout_ms = tr_step_timeout;
        if (train->count("--log")) config.log_path = tr_log;
        if (train->count("--qtable")) config.qtable_path = tr_qtable;
        return cmd_train(config);
    }
    if (eval->parsed()) {
        TrainConfig config;
        if (!build_config(ev_config_path, eval, ev_endpoints, ev_agent, ev_have_epsilon,
                          config))
            return kExitConfig;
        return cmd_eval(config, ev_qtable, ev_episodes);
    }
    return 0;
}
