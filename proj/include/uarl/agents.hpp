#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "uarl/random.hpp"

namespace uarl {

/// One experience step over flat space indices.
struct Transition {
    size_t state = 0;
    size_t action = 0;
    double reward = 0.0;
    size_t next_state = 0;
    bool terminal = false;
};

/// The whole agent contract; the episode loop touches agents through
/// nothing else, which is what makes them swappable.
class Agent {
  public:
    virtual ~Agent() = default;
    virtual void begin_episode() {}
    virtual size_t select_action(size_t state) = 0;
    virtual void observe(const Transition&) {}
};

/// Per-row argmax with ties broken toward the lowest index.
size_t argmax_lowest(const std::vector<double>& row);

/// Tabular Q-learning with constant learning rate and epsilon-greedy
/// exploration. The table starts at zero.
class QLearningAgent : public Agent {
  public:
    QLearningAgent(size_t num_states, size_t num_actions, double alpha,
                   double gamma, double epsilon, uint64_t seed);

    size_t select_action(size_t state) override;
    void observe(const Transition& t) override { update(t); }

    /// Q(s,a) += alpha * (r + gamma * max_b Q(s',b) * [not terminal] - Q(s,a))
    void update(const Transition& t);

    double q(size_t state, size_t action) const;
    std::vector<double> q_row(size_t state) const;
    std::vector<size_t> greedy_policy() const;

    size_t num_states() const { return num_states_; }
    size_t num_actions() const { return num_actions_; }
    double alpha() const { return alpha_; }
    double gamma() const { return gamma_; }
    double epsilon() const { return epsilon_; }
    void set_epsilon(double eps) { epsilon_ = eps; }

    void save_csv(std::ostream& out) const;
    void save_csv_file(const std::string& path) const;

    /// Loads a table written by save_csv; dimensions come from the header.
    static QLearningAgent load_csv(std::istream& in);
    static QLearningAgent load_csv_file(const std::string& path);

  private:
    size_t num_states_;
    size_t num_actions_;
    double alpha_;
    double gamma_;
    double epsilon_;
    std::mt19937_64 rng_;
    std::vector<double> table_;  // row-major |S| x |A|
};

/// Uniform-random baseline.
class RandomAgent : public Agent {
  public:
    RandomAgent(size_t num_actions, uint64_t seed)
        : num_actions_(num_actions), rng_(seed) {}
    size_t select_action(size_t) override {
        return rnd::uniform_index(rng_, num_actions_);
    }

  private:
    size_t num_actions_;
    std::mt19937_64 rng_;
};

/// Plays a frozen table greedily; never learns. Used by eval.
class GreedyTableAgent : public Agent {
  public:
    GreedyTableAgent(size_t num_states, size_t num_actions, std::vector<double> table)
        : num_states_(num_states), num_actions_(num_actions), table_(std::move(table)) {}
    explicit GreedyTableAgent(const QLearningAgent& trained);

    size_t select_action(size_t state) override;

  private:
    size_t num_states_;
    size_t num_actions_;
    std::vector<double> table_;
};

// ---------------------------------------------------------------------------
// Explicit MDP + value iteration (the optimal-policy oracle)
// ---------------------------------------------------------------------------

struct MdpOutcome {
    double probability = 1.0;
    size_t next_state = 0;
    double reward = 0.0;
    bool terminal = false;
};

/// A small finite MDP given by explicit outcome distributions. States with no
/// outcomes for any action are absorbing with value 0.
class ExplicitMdp {
  public:
    ExplicitMdp(size_t num_states, size_t num_actions)
        : num_states_(num_states), num_actions_(num_actions),
          outcomes_(num_states * num_actions) {}

    void add(size_t state, size_t action, MdpOutcome outcome) {
        outcomes_[state * num_actions_ + action].push_back(outcome);
    }

    const std::vector<MdpOutcome>& outcomes(size_t state, size_t action) const {
        return outcomes_[state * num_actions_ + action];
    }

    /// Probabilities per (s,a) sum to 1 (or the row is empty).
    bool stochastic() const;

    size_t num_states() const { return num_states_; }
    size_t num_actions() const { return num_actions_; }

  private:
    size_t num_states_;
    size_t num_actions_;
    std::vector<std::vector<MdpOutcome>> outcomes_;
};

struct ValueIterationResult {
    std::vector<double> values;        // V*(s)
    std::vector<size_t> policy;        // argmax_a Q*(s,a), lowest-index ties
    std::vector<double> q;             // row-major |S| x |A|

    double q_at(size_t s, size_t a, size_t num_actions) const {
        return q[s * num_actions + a];
    }
    /// Whether an action is optimal at s (within tol of V*).
    bool optimal(size_t s, size_t a, size_t num_actions, double tol = 1e-9) const {
        return q_at(s, a, num_actions) >= values[s] - tol;
    }
};

/// Bellman optimality backups until the max value change drops below tol.
ValueIterationResult value_iteration(const ExplicitMdp& mdp, double gamma, double tol);

/// Expected undiscounted episode value of a fixed stochastic policy
/// (action probabilities per state); used as an independent oracle for
/// baseline returns.
std::vector<double> policy_evaluation(const ExplicitMdp& mdp,
                                      const std::vector<std::vector<double>>& action_probs,
                                      double gamma, double tol);

}  // namespace uarl
