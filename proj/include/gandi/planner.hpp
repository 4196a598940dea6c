#pragma once

// Greedy best-first search in continuous action space: pop the node with the
// lowest ordering key, sample k actions, push the feasible children, then
// push the popped node back (reconsideration). No closed list; continuous
// states are almost surely distinct.
//
// A Domain provides:
//   using State = ...;
//   bool   is_goal(const State&) const;
//   double heuristic(const State&) const;
//   bool   feasible(const State&, const std::vector<double>& action) const;
//   State  transition(const State&, const std::vector<double>& action) const;

#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "gandi/data.hpp"
#include "gandi/rng.hpp"

namespace gandi {

struct SearchBudget {
    std::size_t max_expansions = 0;

    void validate() const {
        if (max_expansions == 0)
            throw std::invalid_argument("SearchBudget: max_expansions must be positive");
    }
};

/// Ordering key (1-lambda)*H + lambda*depth. lambda = 0 is the plain greedy
/// ordering; lambda = 1 with a uniform heuristic is breadth-first order.
inline double ordering_key(double h_value, std::size_t depth, double path_cost_weight) {
    if (path_cost_weight < 0.0 || path_cost_weight > 1.0)
        throw std::invalid_argument("path_cost_weight must lie in [0,1]");
    return (1.0 - path_cost_weight) * h_value +
           path_cost_weight * static_cast<double>(depth);
}

enum class SearchOutcome { solved, budget_exhausted };

template <class State>
struct SearchNode {
    State state;
    int parent = -1;                       // index into nodes, -1 for the root
    std::vector<double> action_in;         // empty for the root
    std::size_t depth = 0;
    double h_value = 0.0;
    std::size_t visits = 0;                // completed expansions of this node
};

/// One sampled action at an expansion; infeasible samples create no child
/// but stay on record.
struct SampleRecord {
    int parent_node = -1;
    std::vector<double> action;
    bool feasible = false;
    int child_node = -1; // -1 when infeasible
};

template <class State>
struct PlanStep {
    State state; // state the action was applied in
    std::vector<double> action;
};

template <class State>
struct SearchResult {
    SearchOutcome outcome = SearchOutcome::budget_exhausted;
    std::vector<PlanStep<State>> plan;
    std::size_t expansions = 0;
    std::vector<SearchNode<State>> nodes;
    std::vector<SampleRecord> samples;
    int goal_node = -1; // index into nodes when solved
};

template <class Domain>
using ActionSampler =
    std::function<std::vector<double>(const typename Domain::State&, Rng&)>;

template <class Domain>
SearchResult<typename Domain::State> search(const Domain& domain,
                                            const typename Domain::State& initial,
                                            std::size_t k, const ActionSampler<Domain>& sampler,
                                            const SearchBudget& budget, Rng& rng,
                                            double path_cost_weight = 0.0) {
    using State = typename Domain::State;
    if (k < 1) throw std::invalid_argument("search: k must be >= 1");
    budget.validate();

    SearchResult<State> result;
    result.nodes.push_back({initial, -1, {}, 0, domain.heuristic(initial), 0});

    // min-key queue with FIFO tie-breaking via a push sequence number
    struct Entry {
        double key;
        std::size_t seq;
        int node;
        bool operator>(const Entry& other) const {
            if (key != other.key) return key > other.key;
            return seq > other.seq;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    std::size_t seq = 0;
    // a re-pushed node's completed expansions count into its effective depth,
    // so with path_cost_weight = 1 reconsidered nodes queue up behind fresh
    // nodes of the same depth instead of monopolizing the frontier
    auto push = [&](int node_id) {
        const auto& n = result.nodes[static_cast<std::size_t>(node_id)];
        queue.push(
            {ordering_key(n.h_value, n.depth + n.visits, path_cost_weight), seq++, node_id});
    };
    push(0);

    while (!queue.empty()) {
        const int cur = queue.top().node;
        queue.pop();
        const std::size_t cur_idx = static_cast<std::size_t>(cur);
        if (domain.is_goal(result.nodes[cur_idx].state)) {
            result.outcome = SearchOutcome::solved;
            result.goal_node = cur;
            // walk parents to recover the plan
            std::vector<PlanStep<State>> rev;
            for (int id = cur; result.nodes[static_cast<std::size_t>(id)].parent >= 0;
                 id = result.nodes[static_cast<std::size_t>(id)].parent) {
                const auto& n = result.nodes[static_cast<std::size_t>(id)];
                rev.push_back({result.nodes[static_cast<std::size_t>(n.parent)].state, n.action_in});
            }
            result.plan.assign(rev.rbegin(), rev.rend());
            return result;
        }
        if (result.expansions >= budget.max_expansions) {
            result.outcome = SearchOutcome::budget_exhausted;
            return result;
        }
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<double> action = sampler(result.nodes[cur_idx].state, rng);
            const bool ok = domain.feasible(result.nodes[cur_idx].state, action);
            SampleRecord rec{cur, action, ok, -1};
            if (ok) {
                State next = domain.transition(result.nodes[cur_idx].state, action);
                const double h = domain.heuristic(next);
                rec.child_node = static_cast<int>(result.nodes.size());
                result.nodes.push_back({std::move(next), cur, std::move(action),
                                        result.nodes[cur_idx].depth + 1, h, 0});
                push(rec.child_node);
            }
            result.samples.push_back(std::move(rec));
        }
        result.nodes[cur_idx].visits += 1;
        push(cur); // reconsideration
        result.expansions += 1;
    }
    result.outcome = SearchOutcome::budget_exhausted;
    return result;
}

/// Split a solved search into on-target (plan) and off-target experience.
/// Off-target covers every other sampled action, including infeasible ones:
/// they were drawn by the behaviour distribution and did not advance the
/// plan, which is exactly what the off-target set is meant to describe.
template <class State, class Featurize>
std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> extract_experience(
    const SearchResult<State>& result, Featurize featurize) {
    if (result.outcome != SearchOutcome::solved)
        throw std::invalid_argument("extract_experience: search did not solve the instance");
    std::vector<bool> on_plan(result.nodes.size(), false);
    for (int id = result.goal_node; id > 0;
         id = result.nodes[static_cast<std::size_t>(id)].parent)
        on_plan[static_cast<std::size_t>(id)] = true;
    std::vector<LabeledSample> on_target, off_target;
    for (const auto& rec : result.samples) {
        LabeledSample s;
        s.context = featurize(result.nodes[static_cast<std::size_t>(rec.parent_node)].state);
        s.action = rec.action;
        if (rec.child_node >= 0 && on_plan[static_cast<std::size_t>(rec.child_node)]) {
            s.label = SampleLabel::on_target;
            on_target.push_back(std::move(s));
        } else {
            s.label = SampleLabel::off_target;
            off_target.push_back(std::move(s));
        }
    }
    return {std::move(on_target), std::move(off_target)};
}

} // namespace gandi
