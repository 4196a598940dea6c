#pragma once

// 2D reconfiguration: five movable 0.05 m squares and one fixed 0.07 m target
// square inside a 0.7 m x 0.4 m bin. The goal is a clear access corridor to
// the target from the front edge. Moves pick an object and a new (x, y) pose;
// both the pick-up and the put-down require a clear corridor. Corridors are
// inflated by 5 mm per side to stand in for gripper width.

#include <array>
#include <vector>

#include "gandi/data.hpp"
#include "gandi/domains/geometry.hpp"
#include "gandi/rng.hpp"

namespace gandi {

constexpr double kReconfigDepth = 0.4;     // x extent (access axis)
constexpr double kReconfigWidth = 0.7;     // y extent
constexpr double kObstacleSize = 0.05;
constexpr double kTargetSize = 0.07;
constexpr double kCorridorClearance = 0.005;
constexpr std::size_t kNumObstacles = 5;

struct ReconfigState {
    // index order fixed: 0..4 movable obstacles, 5 = target (never moves)
    std::vector<std::array<double, 2>> poses;
};

struct ReconfigInstance {
    ReconfigState initial;
};

class ReconfigDomain {
public:
    using State = ReconfigState;

    bool is_goal(const State& s) const { return corridor_clear(s, target_index(), s.poses[target_index()]); }

    /// No informative cost-to-go is evident; use path_cost_weight = 1 for
    /// breadth-first ordering.
    double heuristic(const State&) const { return 0.0; }

    /// Placement box for a moved obstacle's center.
    static BoxBounds placement_box() {
        const double h = kObstacleSize / 2.0;
        return {{h, h}, {kReconfigDepth - h, kReconfigWidth - h}};
    }

    /// Action = (object index, x, y).
    bool feasible(const State& s, const std::vector<double>& action) const {
        if (action.size() != 3) return false;
        const int idx = static_cast<int>(action[0]);
        if (idx < 0 || idx >= static_cast<int>(kNumObstacles)) return false;
        const std::array<double, 2> pose = {action[1], action[2]};
        if (!placement_box().contains({pose[0], pose[1]})) return false;
        const Rect moved = Rect::square(pose[0], pose[1], kObstacleSize);
        for (std::size_t i = 0; i < s.poses.size(); ++i) {
            if (static_cast<int>(i) == idx) continue;
            if (moved.overlaps(object_rect(s, i))) return false;
        }
        // clear pick-up at the current pose and put-down at the new pose
        return corridor_clear(s, idx, s.poses[static_cast<std::size_t>(idx)]) &&
               corridor_clear(s, idx, pose);
    }

    State transition(const State& s, const std::vector<double>& action) const {
        if (!feasible(s, action))
            throw std::invalid_argument("reconfig transition: infeasible action");
        State next = s;
        next.poses[static_cast<std::size_t>(static_cast<int>(action[0]))] = {action[1], action[2]};
        return next;
    }

    /// Uniform object choice plus a uniform placement pose.
    std::vector<double> sample_uniform_action(const State&, Rng& rng) const {
        const auto box = placement_box();
        return {static_cast<double>(rng.uniform_index(kNumObstacles)),
                rng.uniform(box.lo[0], box.hi[0]), rng.uniform(box.lo[1], box.hi[1])};
    }

    /// Context features: poses of all six objects in fixed index order.
    /// Storage order is significant; there is no canonicalization.
    std::vector<double> featurize(const State& s) const {
        std::vector<double> f;
        f.reserve(2 * s.poses.size());
        for (const auto& p : s.poses) {
            f.push_back(p[0]);
            f.push_back(p[1]);
        }
        return f;
    }

    static BoxBounds context_box() {
        BoxBounds box;
        for (std::size_t i = 0; i <= kNumObstacles; ++i) {
            box.lo.push_back(0.0);
            box.lo.push_back(0.0);
            box.hi.push_back(kReconfigDepth);
            box.hi.push_back(kReconfigWidth);
        }
        return box;
    }

    static std::size_t context_dim() { return 2 * (kNumObstacles + 1); }
    static std::size_t target_index() { return kNumObstacles; }

    static Rect object_rect(const State& s, std::size_t i) {
        const double side = i == target_index() ? kTargetSize : kObstacleSize;
        return Rect::square(s.poses[i][0], s.poses[i][1], side);
    }

    /// Corridor from the front edge to the given pose of object `idx`,
    /// inflated for gripper clearance; clear iff it misses every other object.
    bool corridor_clear(const State& s, int idx, const std::array<double, 2>& pose) const {
        const double side =
            static_cast<std::size_t>(idx) == target_index() ? kTargetSize : kObstacleSize;
        const Rect corridor = access_corridor(pose[0], pose[1], side)
                                  .inflated(kCorridorClearance);
        for (std::size_t i = 0; i < s.poses.size(); ++i) {
            if (static_cast<int>(i) == idx) continue;
            if (corridor.overlaps(object_rect(s, i))) return false;
        }
        return true;
    }
};

/// Random instance: target centered in the back band of depth equal to its
/// size, obstacles rejection-sampled to a non-overlapping initial layout.
inline ReconfigInstance sample_reconfig_instance(Rng& rng) {
    ReconfigInstance inst;
    inst.initial.poses.resize(kNumObstacles + 1);
    const double tx = kReconfigDepth - kTargetSize / 2.0;
    const double th = kTargetSize / 2.0;
    inst.initial.poses[ReconfigDomain::target_index()] = {
        tx, rng.uniform(th, kReconfigWidth - th)};
    const auto box = ReconfigDomain::placement_box();
    for (std::size_t i = 0; i < kNumObstacles; ++i) {
        for (;;) {
            const std::array<double, 2> pose = {rng.uniform(box.lo[0], box.hi[0]),
                                                rng.uniform(box.lo[1], box.hi[1])};
            const Rect r = Rect::square(pose[0], pose[1], kObstacleSize);
            bool clear = !r.overlaps(Rect::square(
                inst.initial.poses[ReconfigDomain::target_index()][0],
                inst.initial.poses[ReconfigDomain::target_index()][1], kTargetSize));
            for (std::size_t j = 0; clear && j < i; ++j)
                clear = !r.overlaps(Rect::square(inst.initial.poses[j][0],
                                                 inst.initial.poses[j][1], kObstacleSize));
            if (clear) {
                inst.initial.poses[i] = pose;
                break;
            }
        }
    }
    return inst;
}

} // namespace gandi
