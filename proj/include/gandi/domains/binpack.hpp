#pragma once

// 2D side-access bin packing: place n_obj equal-sized squares into a
// 0.3 m x 1.0 m bin. The opening runs along the 0.3 m edge at x = 0 and the
// bin extends 1.0 m away from it; each placement must reach its pose through
// a clear straight corridor from the opening. Only two or three objects fit
// side by side, so solutions pack rows from the back toward the front and
// placements near the front early in an episode create dead-ends.

#include <algorithm>
#include <array>
#include <vector>

#include "gandi/data.hpp"
#include "gandi/domains/geometry.hpp"
#include "gandi/rng.hpp"

namespace gandi {

struct BinPackInstance {
    std::size_t n_obj = 5;        // in {5..8}
    double object_size = 0.08;    // side length in [0.05, 0.11] m
};

constexpr double kBinDepth = 1.0; // x extent (access axis)
constexpr double kBinWidth = 0.3; // y extent (opening edge)

inline BinPackInstance sample_binpack_instance(Rng& rng) {
    BinPackInstance inst;
    inst.n_obj = 5 + rng.uniform_index(4);
    inst.object_size = rng.uniform(0.05, 0.11);
    return inst;
}

struct BinPackState {
    std::vector<std::array<double, 2>> placed; // square centers
};

class BinPackDomain {
public:
    using State = BinPackState;

    explicit BinPackDomain(BinPackInstance inst) : inst_(inst) {}

    const BinPackInstance& instance() const { return inst_; }

    bool is_goal(const State& s) const { return s.placed.size() >= inst_.n_obj; }

    /// Cost-to-go estimate: objects remaining.
    double heuristic(const State& s) const {
        return static_cast<double>(inst_.n_obj) - static_cast<double>(s.placed.size());
    }

    /// Centers such that the square fits inside the bin.
    BoxBounds action_box() const {
        const double h = inst_.object_size / 2.0;
        return {{h, h}, {kBinDepth - h, kBinWidth - h}};
    }

    bool feasible(const State& s, const std::vector<double>& action) const {
        if (action.size() != 2) return false;
        if (!action_box().contains(action)) return false;
        const Rect sq = Rect::square(action[0], action[1], inst_.object_size);
        const Rect corridor = access_corridor(action[0], action[1], inst_.object_size);
        for (const auto& c : s.placed) {
            const Rect placed = Rect::square(c[0], c[1], inst_.object_size);
            if (sq.overlaps(placed) || corridor.overlaps(placed)) return false;
        }
        return true;
    }

    State transition(const State& s, const std::vector<double>& action) const {
        if (!feasible(s, action))
            throw std::invalid_argument("binpack transition: infeasible action");
        State next = s;
        next.placed.push_back({action[0], action[1]});
        return next;
    }

    std::vector<double> sample_uniform_action(const State&, Rng& rng) const {
        const auto box = action_box();
        return {rng.uniform(box.lo[0], box.hi[0]), rng.uniform(box.lo[1], box.hi[1])};
    }

    /// Context features: instance parameters only; placements do not enter.
    std::vector<double> featurize(const State&) const {
        return {static_cast<double>(inst_.n_obj), inst_.object_size};
    }

    static BoxBounds context_box() { return {{5.0, 0.05}, {8.0, 0.11}}; }
    static std::size_t context_dim() { return 2; }
    static std::size_t action_dim() { return 2; }

private:
    BinPackInstance inst_;
};

} // namespace gandi
