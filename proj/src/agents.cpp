#include "uarl/agents.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uarl {

size_t argmax_lowest(const std::vector<double>& row) {
    size_t best = 0;
    for (size_t i = 1; i < row.size(); ++i)
        if (row[i] > row[best]) best = i;
    return best;
}

QLearningAgent::QLearningAgent(size_t num_states, size_t num_actions, double alpha,
                               double gamma, double epsilon, uint64_t seed)
    : num_states_(num_states), num_actions_(num_actions), alpha_(alpha),
      gamma_(gamma), epsilon_(epsilon), rng_(seed),
      table_(num_states * num_actions, 0.0) {
    if (num_states == 0 || num_actions == 0)
        throw std::invalid_argument("Q-table dimensions must be positive");
}

size_t QLearningAgent::select_action(size_t state) {
    if (state >= num_states_) throw std::out_of_range("state index out of range");
    if (epsilon_ > 0.0 && rnd::uniform01(rng_) < epsilon_)
        return rnd::uniform_index(rng_, num_actions_);
    return argmax_lowest(q_row(state));
}

void QLearningAgent::update(const Transition& t) {
    if (t.state >= num_states_ || t.next_state >= num_states_ ||
        t.action >= num_actions_)
        throw std::out_of_range("transition indices out of range");
    double bootstrap = 0.0;
    if (!t.terminal) {
        auto row = q_row(t.next_state);
        bootstrap = gamma_ * row[argmax_lowest(row)];
    }
    double& entry = table_[t.state * num_actions_ + t.action];
    entry += alpha_ * (t.reward + bootstrap - entry);
}

double QLearningAgent::q(size_t state, size_t action) const {
    return table_[state * num_actions_ + action];
}

std::vector<double> QLearningAgent::q_row(size_t state) const {
    auto first = table_.begin() + long(state * num_actions_);
    return std::vector<double>(first, first + long(num_actions_));
}

std::vector<size_t> QLearningAgent::greedy_policy() const {
    std::vector<size_t> policy(num_states_);
    for (size_t s = 0; s < num_states_; ++s) policy[s] = argmax_lowest(q_row(s));
    return policy;
}

void QLearningAgent::save_csv(std::ostream& out) const {
    out << "# uarl-qtable states=" << num_states_ << " actions=" << num_actions_
        << " alpha=" << alpha_ << " gamma=" << gamma_ << " epsilon=" << epsilon_
        << "\n";
    out << "state";
    for (size_t a = 0; a < num_actions_; ++a) out << ",a" << a;
    out << "\n";
    char buf[32];
    for (size_t s = 0; s < num_states_; ++s) {
        out << s;
        for (size_t a = 0; a < num_actions_; ++a) {
            std::snprintf(buf, sizeof(buf), "%.17g", q(s, a));
            out << ',' << buf;
        }
        out << "\n";
    }
}

void QLearningAgent::save_csv_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    save_csv(out);
}

QLearningAgent QLearningAgent::load_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# uarl-qtable", 0) != 0)
        throw std::runtime_error("not a uarl Q-table file");
    size_t states = 0, actions = 0;
    {
        std::istringstream meta(line);
        std::string tok;
        while (meta >> tok) {
            if (tok.rfind("states=", 0) == 0) states = std::stoul(tok.substr(7));
            if (tok.rfind("actions=", 0) == 0) actions = std::stoul(tok.substr(8));
        }
    }
    if (states == 0 || actions == 0)
        throw std::runtime_error("Q-table header lacks dimensions");
    if (!std::getline(in, line)) throw std::runtime_error("Q-table missing column header");

    QLearningAgent agent(states, actions, 0.0, 0.0, 0.0, 0);
    for (size_t s = 0; s < states; ++s) {
        if (!std::getline(in, line))
            throw std::runtime_error("Q-table has fewer rows than the header claims");
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',') || std::stoul(cell) != s)
            throw std::runtime_error("Q-table rows out of order");
        for (size_t a = 0; a < actions; ++a) {
            if (!std::getline(row, cell, ','))
                throw std::runtime_error("Q-table row too short");
            agent.table_[s * actions + a] = std::stod(cell);
        }
    }
    return agent;
}

QLearningAgent QLearningAgent::load_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return load_csv(in);
}

GreedyTableAgent::GreedyTableAgent(const QLearningAgent& trained)
    : num_states_(trained.num_states()), num_actions_(trained.num_actions()) {
    table_.reserve(num_states_ * num_actions_);
    for (size_t s = 0; s < num_states_; ++s)
        for (size_t a = 0; a < num_actions_; ++a) table_.push_back(trained.q(s, a));
}

size_t GreedyTableAgent::select_action(size_t state) {
    if (state >= num_states_) throw std::out_of_range("state index out of range");
    auto first = table_.begin() + long(state * num_actions_);
    std::vector<double> row(first, first + long(num_actions_));
    return argmax_lowest(row);
}

bool ExplicitMdp::stochastic() const {
    for (const auto& row : outcomes_) {
        if (row.empty()) continue;
        double total = 0;
        for (const auto& o : row) total += o.probability;
        if (std::abs(total - 1.0) > 1e-9) return false;
    }
    return true;
}

ValueIterationResult value_iteration(const ExplicitMdp& mdp, double gamma, double tol) {
    const size_t S = mdp.num_states(), A = mdp.num_actions();
    ValueIterationResult result;
    result.values.assign(S, 0.0);
    result.policy.assign(S, 0);
    result.q.assign(S * A, 0.0);

    for (int iter = 0; iter < 100000; ++iter) {
        double residual = 0.0;
        for (size_t s = 0; s < S; ++s) {
            double best = 0.0;
            bool any = false;
            for (size_t a = 0; a < A; ++a) {
                const auto& outs = mdp.outcomes(s, a);
                if (outs.empty()) {
                    result.q[s * A + a] = 0.0;
                    continue;
                }
                double qsa = 0.0;
                for (const auto& o : outs) {
                    double future = o.terminal ? 0.0 : gamma * result.values[o.next_state];
                    qsa += o.probability * (o.reward + future);
                }
                result.q[s * A + a] = qsa;
                if (!any || qsa > best) best = qsa;
                any = true;
            }
            double v = any ? best : 0.0;
            residual = std::max(residual, std::abs(v - result.values[s]));
            result.values[s] = v;
        }
        if (residual < tol) break;
    }
    for (size_t s = 0; s < S; ++s) {
        std::vector<double> row(result.q.begin() + long(s * A),
                                result.q.begin() + long((s + 1) * A));
        result.policy[s] = argmax_lowest(row);
    }
    return result;
}

std::vector<double> policy_evaluation(const ExplicitMdp& mdp,
                                      const std::vector<std::vector<double>>& action_probs,
                                      double gamma, double tol) {
    const size_t S = mdp.num_states(), A = mdp.num_actions();
    std::vector<double> values(S, 0.0);
    for (int iter = 0; iter < 100000; ++iter) {
        double residual = 0.0;
        for (size_t s = 0; s < S; ++s) {
            double v = 0.0;
            for (size_t a = 0; a < A; ++a) {
                double pa = action_probs[s][a];
                if (pa == 0.0) continue;
                for (const auto& o : mdp.outcomes(s, a)) {
                    double future = o.terminal ? 0.0 : gamma * values[o.next_state];
                    v += pa * o.probability * (o.reward + future);
                }
            }
            residual = std::max(residual, std::abs(v - values[s]));
            values[s] = v;
        }
        if (residual < tol) break;
    }
    return values;
}

}  // namespace uarl
