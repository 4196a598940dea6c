#pragma once

// Bootstrap resampling: turn importance weights over the merged experience
// set into resampling probabilities, then draw with replacement. The
// resulting empirical distribution is proportional to the target.

#include <numeric>
#include <stdexcept>
#include <vector>

#include "gandi/data.hpp"
#include "gandi/importance.hpp"
#include "gandi/rng.hpp"

namespace gandi {

struct BootstrapPlan {
    std::vector<LabeledSample> source;  // A = A_p U A_q
    std::vector<double> probabilities;  // p_w, sums to 1
    double effective_sample_size = 0.0; // c = sum of weights
};

inline BootstrapPlan build_plan(std::vector<LabeledSample> samples, std::vector<double> weights) {
    if (samples.empty()) throw std::invalid_argument("build_plan: empty sample set");
    if (weights.size() != samples.size())
        throw std::invalid_argument("build_plan: weight count mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("build_plan: negative weight");
        total += w;
    }
    if (total <= 0.0)
        throw std::runtime_error("build_plan: all importance weights are zero, cannot bootstrap");
    BootstrapPlan plan;
    plan.source = std::move(samples);
    plan.effective_sample_size = total;
    plan.probabilities.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        plan.probabilities[i] = weights[i] / total;
    return plan;
}

inline BootstrapPlan build_plan(std::vector<LabeledSample> samples, const ImportanceModel& model) {
    std::vector<double> weights(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) weights[i] = model.weight(samples[i]);
    return build_plan(std::move(samples), std::move(weights));
}

/// Convenience overload merging the two labeled sets (A_p first, then A_q).
inline BootstrapPlan build_plan(const std::vector<LabeledSample>& on_target,
                                const std::vector<LabeledSample>& off_target,
                                const ImportanceModel& model) {
    std::vector<LabeledSample> merged = on_target;
    merged.insert(merged.end(), off_target.begin(), off_target.end());
    return build_plan(std::move(merged), model);
}

/// Draw one index from the plan by cumulative-sum inversion. Tie rule: a
/// uniform draw u selects the first index whose cumulative sum is strictly
/// greater than u, so zero-probability entries are never drawn.
inline std::size_t bootstrap_index(const BootstrapPlan& plan, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < plan.probabilities.size(); ++i) {
        cum += plan.probabilities[i];
        if (u < cum) return i;
    }
    // u landed in rounding slack past the last positive entry
    for (std::size_t i = plan.probabilities.size(); i-- > 0;)
        if (plan.probabilities[i] > 0.0) return i;
    throw std::logic_error("bootstrap_index: no positive probability");
}

/// n i.i.d. draws from p_w with replacement.
inline std::vector<LabeledSample> bootstrap(const BootstrapPlan& plan, std::size_t n, Rng& rng) {
    std::vector<LabeledSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(plan.source[bootstrap_index(plan, rng)]);
    return out;
}

} // namespace gandi
