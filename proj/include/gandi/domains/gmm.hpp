#pragma once

// Illustrative 2D Gaussian-mixture pair: the target p has modes at (1,1) and
// (3,1); the behavior distribution q adds a third mode at (2,2) with larger
// variance. Densities are exact, samples are i.i.d.

#include <array>
#include <cmath>
#include <vector>

#include "gandi/data.hpp"
#include "gandi/rng.hpp"

namespace gandi {

struct GmmSpec {
    std::vector<std::array<double, 2>> means;
    double variance = 0.05; // isotropic, shared across components

    double density(double x, double y) const {
        const double norm = 1.0 / (2.0 * 3.14159265358979323846 * variance);
        double d = 0.0;
        for (const auto& m : means) {
            const double dx = x - m[0];
            const double dy = y - m[1];
            d += norm * std::exp(-(dx * dx + dy * dy) / (2.0 * variance));
        }
        return d / static_cast<double>(means.size());
    }

    std::array<double, 2> sample(Rng& rng) const {
        const auto& m = means[rng.uniform_index(means.size())];
        const double sigma = std::sqrt(variance);
        return {m[0] + sigma * rng.normal(), m[1] + sigma * rng.normal()};
    }
};

inline GmmSpec gmm_p() { return {{{1.0, 1.0}, {3.0, 1.0}}, 0.05}; }
inline GmmSpec gmm_q() { return {{{1.0, 1.0}, {3.0, 1.0}, {2.0, 2.0}}, 0.1}; }

/// Fixed working box covering essentially all mass of both mixtures; used to
/// normalize toy samples for the networks.
inline BoxBounds gmm_box() { return {{-0.5, -0.5}, {4.5, 3.5}}; }

} // namespace gandi
