#pragma once

// Conditional GAN training and the importance-bootstrapped variant:
// generator G(context, z) -> action, discriminator D(context, action) -> (0,1).
// D maximizes log-likelihood of the real/fake labels; losses below are its
// negation, so both players minimize.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gandi/data.hpp"
#include "gandi/importance.hpp"
#include "gandi/net.hpp"
#include "gandi/resampler.hpp"
#include "gandi/rng.hpp"

namespace gandi {

constexpr double kLogFloor = 1e-12;

inline double safe_log(double x) { return std::log(x < kLogFloor ? kLogFloor : x); }

struct Generator {
    DenseNet net;              // (context_norm ++ z) -> action in [-1,1] coords
    std::size_t noise_dim = 4; // z ~ standard normal
    std::size_t context_dim = 0;
    BoxBounds context_box;
    BoxBounds action_box;
};

struct Discriminator {
    DenseNet net; // (context_norm ++ action_norm) -> sigmoid score
    std::size_t context_dim = 0;
    std::size_t action_dim = 0;
};

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t max_epochs = 500;
    double d_learning_rate = 0.001; // Adam
    double g_learning_rate = 0.001; // Adam
    std::size_t checkpoint_every = 25;
    std::size_t noise_dim = 4;
    std::vector<std::size_t> g_hidden = {32, 32, 32};
    std::vector<std::size_t> d_hidden = {32, 256, 32};

    // max_epochs = 0 is allowed and returns the untrained initialization
    void validate() const {
        if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
    }
};

struct EpochLosses {
    std::size_t epoch = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
};

struct TrainResult {
    Generator generator;
    Discriminator discriminator;
    std::vector<std::pair<std::size_t, Generator>> checkpoints; // (epoch, snapshot)
    std::vector<EpochLosses> curve;
    double clamp_rate = 0.0; // fraction of post-training probe samples clamped
};

// ---------------------------------------------------------------------------
// Reference loss functions (also used by tests).

inline std::vector<double> discriminator_input(const Discriminator&,
                                               const std::vector<double>& context_norm,
                                               const std::vector<double>& action_norm) {
    return concat(context_norm, action_norm);
}

/// Mean over pairs of -[log D(real) + log(1 - D(fake))]. Inputs are already
/// normalized coordinates.
inline double discriminator_loss(const Discriminator& d,
                                 const std::vector<std::vector<double>>& contexts,
                                 const std::vector<std::vector<double>>& real_actions,
                                 const std::vector<std::vector<double>>& fake_actions) {
    if (real_actions.size() != fake_actions.size())
        throw std::invalid_argument("discriminator_loss: real/fake counts must match");
    if (real_actions.empty()) throw std::invalid_argument("discriminator_loss: empty batch");
    double loss = 0.0;
    for (std::size_t i = 0; i < real_actions.size(); ++i) {
        const auto& ctx = contexts.empty() ? std::vector<double>{} : contexts[i];
        loss -= safe_log(d.net.forward(concat(ctx, real_actions[i]))[0]);
        loss -= safe_log(1.0 - d.net.forward(concat(ctx, fake_actions[i]))[0]);
    }
    return loss / static_cast<double>(real_actions.size());
}

/// Mean of -log D over generated samples.
inline double generator_loss(const Discriminator& d,
                             const std::vector<std::vector<double>>& contexts,
                             const std::vector<std::vector<double>>& fake_actions) {
    if (fake_actions.empty()) throw std::invalid_argument("generator_loss: empty batch");
    double loss = 0.0;
    for (std::size_t i = 0; i < fake_actions.size(); ++i) {
        const auto& ctx = contexts.empty() ? std::vector<double>{} : contexts[i];
        loss -= safe_log(d.net.forward(concat(ctx, fake_actions[i]))[0]);
    }
    return loss / static_cast<double>(fake_actions.size());
}

/// Reweighted discriminator loss: -(1/n_q) sum w_i log D(a_i)
/// - (1/n_g) sum log(1 - D(fake_j)). Reduces to discriminator_loss when all
/// weights are 1 and the counts match. Reference implementation for tests;
/// training uses the bootstrap path instead.
inline double weighted_discriminator_loss(const Discriminator& d,
                                          const std::vector<std::vector<double>>& contexts,
                                          const std::vector<std::vector<double>>& off_actions,
                                          const std::vector<double>& weights,
                                          const std::vector<std::vector<double>>& fake_actions) {
    if (off_actions.size() != weights.size())
        throw std::invalid_argument("weighted_discriminator_loss: weight count mismatch");
    for (double w : weights)
        if (w < 0.0) throw std::invalid_argument("weighted_discriminator_loss: negative weight");
    double loss = 0.0;
    for (std::size_t i = 0; i < off_actions.size(); ++i) {
        const auto& ctx = contexts.empty() ? std::vector<double>{} : contexts[i];
        loss -= weights[i] * safe_log(d.net.forward(concat(ctx, off_actions[i]))[0]);
    }
    loss /= static_cast<double>(off_actions.size());
    double fake_term = 0.0;
    for (std::size_t i = 0; i < fake_actions.size(); ++i) {
        const auto& ctx = contexts.empty() ? std::vector<double>{} : contexts[i];
        fake_term -= safe_log(1.0 - d.net.forward(concat(ctx, fake_actions[i]))[0]);
    }
    return loss + fake_term / static_cast<double>(fake_actions.size());
}

/// Closed-form optimal discriminator for fixed G: w_hat*q / (w_hat*q + p_G).
inline double optimal_discriminator_value(double w_hat_q_density, double pg_density) {
    if (w_hat_q_density < 0.0 || pg_density < 0.0)
        throw std::invalid_argument("optimal_discriminator_value: negative density");
    const double denom = w_hat_q_density + pg_density;
    if (denom == 0.0)
        throw std::invalid_argument("optimal_discriminator_value: 0/0");
    return w_hat_q_density / denom;
}

// ---------------------------------------------------------------------------
// Sampling

/// Draw z ~ N(0, I), run G, rescale from [-1,1] to the action box and clamp.
inline std::vector<double> sample_action(const Generator& g, const std::vector<double>& context,
                                         Rng& rng, bool* clamped = nullptr) {
    std::vector<double> input = g.context_dim ? g.context_box.normalize(context)
                                              : std::vector<double>{};
    for (std::size_t i = 0; i < g.noise_dim; ++i) input.push_back(rng.normal());
    const auto raw = g.net.forward(input);
    return g.action_box.denormalize_clamped(raw, clamped);
}

// ---------------------------------------------------------------------------
// Training

namespace detail {

inline Generator make_generator(std::size_t context_dim, const BoxBounds& context_box,
                                const BoxBounds& action_box, const TrainConfig& cfg, Rng& rng) {
    Generator g;
    g.noise_dim = cfg.noise_dim;
    g.context_dim = context_dim;
    g.context_box = context_box;
    g.action_box = action_box;
    std::vector<std::size_t> sizes = {context_dim + cfg.noise_dim};
    sizes.insert(sizes.end(), cfg.g_hidden.begin(), cfg.g_hidden.end());
    sizes.push_back(action_box.dim());
    std::vector<Activation> acts(cfg.g_hidden.size(), Activation::relu);
    acts.push_back(Activation::linear);
    g.net = DenseNet::random(sizes, acts, rng);
    return g;
}

inline Discriminator make_discriminator(std::size_t context_dim, std::size_t action_dim,
                                        const TrainConfig& cfg, Rng& rng) {
    Discriminator d;
    d.context_dim = context_dim;
    d.action_dim = action_dim;
    std::vector<std::size_t> sizes = {context_dim + action_dim};
    sizes.insert(sizes.end(), cfg.d_hidden.begin(), cfg.d_hidden.end());
    sizes.push_back(1);
    std::vector<Activation> acts(cfg.d_hidden.size(), Activation::relu);
    acts.push_back(Activation::sigmoid);
    d.net = DenseNet::random(sizes, acts, rng);
    return d;
}

inline double clamp_unit(double v) {
    if (v < kLogFloor) return kLogFloor;
    if (v > 1.0 - kLogFloor) return 1.0 - kLogFloor;
    return v;
}

} // namespace detail

/// Alternating GAN training on (context, action) pairs given in raw domain
/// coordinates. One discriminator step then one generator step per
/// mini-batch; every D batch pairs each real sample with one fresh fake.
inline TrainResult train_gan(const std::vector<LabeledSample>& dataset,
                             const BoxBounds& context_box, const BoxBounds& action_box,
                             const TrainConfig& cfg, Rng& rng) {
    cfg.validate();
    if (dataset.size() < cfg.batch_size)
        throw std::invalid_argument("train_gan: dataset smaller than one batch");
    const std::size_t context_dim = context_box.dim();

    std::vector<std::vector<double>> ctx_n(dataset.size()), act_n(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        ctx_n[i] = context_dim ? context_box.normalize(dataset[i].context)
                               : std::vector<double>{};
        act_n[i] = action_box.normalize(dataset[i].action);
    }

    TrainResult result;
    result.generator = detail::make_generator(context_dim, context_box, action_box, cfg, rng);
    result.discriminator = detail::make_discriminator(context_dim, action_box.dim(), cfg, rng);
    Generator& g = result.generator;
    Discriminator& d = result.discriminator;

    auto d_state = OptimizerState::adam(d.net, cfg.d_learning_rate);
    auto g_state = OptimizerState::adam(g.net, cfg.g_learning_rate);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    auto gen_forward = [&](std::size_t idx) {
        std::vector<double> input = ctx_n[idx];
        for (std::size_t j = 0; j < cfg.noise_dim; ++j) input.push_back(rng.normal());
        return g.net.forward_trace(input);
    };

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        ImportanceModel::shuffle(order, rng);
        double d_loss_sum = 0.0, g_loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start + cfg.batch_size <= order.size();
             start += cfg.batch_size) {
            const std::size_t bs = cfg.batch_size;
            // --- discriminator step: bs reals + bs fakes (balanced)
            Gradients d_grads = d.net.zero_gradients();
            double d_loss = 0.0;
            for (std::size_t i = 0; i < bs; ++i) {
                const std::size_t idx = order[start + i];
                {
                    auto trace = d.net.forward_trace(concat(ctx_n[idx], act_n[idx]));
                    const double out = detail::clamp_unit(trace.outputs.back()[0]);
                    d_loss -= safe_log(out);
                    const double og = -1.0 / out / static_cast<double>(bs);
                    d_grads.add_scaled(d.net.backward(trace, std::vector<double>{og}), 1.0);
                }
                {
                    auto fake = gen_forward(idx).outputs.back();
                    auto trace = d.net.forward_trace(concat(ctx_n[idx], fake));
                    const double out = detail::clamp_unit(trace.outputs.back()[0]);
                    d_loss -= safe_log(1.0 - out);
                    const double og = 1.0 / (1.0 - out) / static_cast<double>(bs);
                    d_grads.add_scaled(d.net.backward(trace, std::vector<double>{og}), 1.0);
                }
            }
            adam_step(d.net, d_grads, d_state);
            d_loss_sum += d_loss / static_cast<double>(bs);

            // --- generator step: fresh noise, gradient flows through D
            Gradients g_grads = g.net.zero_gradients();
            double g_loss = 0.0;
            for (std::size_t i = 0; i < bs; ++i) {
                const std::size_t idx = order[start + i];
                auto g_trace = gen_forward(idx);
                const auto& fake = g_trace.outputs.back();
                auto d_trace = d.net.forward_trace(concat(ctx_n[idx], fake));
                const double out = detail::clamp_unit(d_trace.outputs.back()[0]);
                g_loss -= safe_log(out);
                const double og = -1.0 / out / static_cast<double>(bs);
                const auto d_back = d.net.backward(d_trace, std::vector<double>{og});
                // gradient w.r.t. the action slice of D's input drives G
                std::vector<double> fake_grad(d_back.input_grad.begin() +
                                                  static_cast<std::ptrdiff_t>(context_dim),
                                              d_back.input_grad.end());
                g_grads.add_scaled(g.net.backward(g_trace, fake_grad), 1.0);
            }
            adam_step(g.net, g_grads, g_state);
            g_loss_sum += g_loss / static_cast<double>(bs);
            ++batches;
        }
        if (batches > 0)
            result.curve.push_back({epoch + 1, d_loss_sum / static_cast<double>(batches),
                                    g_loss_sum / static_cast<double>(batches)});
        if (!d.net.all_finite() || !g.net.all_finite())
            throw std::runtime_error("train_gan: non-finite parameter after epoch " +
                                     std::to_string(epoch + 1));
        if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
            result.checkpoints.emplace_back(epoch + 1, g);
    }
    if (result.checkpoints.empty() || result.checkpoints.back().first != cfg.max_epochs)
        result.checkpoints.emplace_back(cfg.max_epochs, g);

    // clamp-rate probe: excess clamping signals an output-scaling bug
    std::size_t clamped_count = 0;
    const std::size_t probes = 1000;
    for (std::size_t i = 0; i < probes; ++i) {
        bool clamped = false;
        sample_action(g, dataset[rng.uniform_index(dataset.size())].context, rng, &clamped);
        if (clamped) ++clamped_count;
    }
    result.clamp_rate = static_cast<double>(clamped_count) / static_cast<double>(probes);
    return result;
}

struct GandiConfig {
    TrainConfig train;
    ImportanceFitConfig importance;
    // Lower bound on the bootstrap sample count. Small collections starve the
    // adversarial training loop of optimizer steps and the generator
    // collapses; resampling more points from the same weighted distribution
    // restores the step budget without changing what is being estimated.
    std::size_t bootstrap_min = 0;
    // Optional projection applied to actions for the ratio fit only; the
    // bootstrap still resamples full records. A low-dimensional view (for
    // example, one informative coordinate) keeps the estimated weights smooth:
    // full-dimensional fits on small collections concentrate the weight mass
    // on a handful of records and the resampled set loses its diversity.
    std::function<std::vector<double>(const std::vector<double>&)> importance_projection;
    // Action box for the generator; empty means importance.action_box. Needed
    // whenever importance_projection changes the action dimensionality.
    BoxBounds gan_action_box;
};

struct GandiResult {
    TrainResult gan;
    ImportanceModel importance;
    BootstrapPlan plan;
    std::vector<LabeledSample> bootstrapped;
};

/// Full pipeline: fit w_hat on (A_p, A_q), build the bootstrap distribution
/// over A_p U A_q, resample |A| records, then train the GAN on the
/// bootstrapped set as on-target data.
inline GandiResult gandi(const std::vector<LabeledSample>& on_target,
                         const std::vector<LabeledSample>& off_target,
                         const GandiConfig& cfg, Rng& rng) {
    if (on_target.empty() || off_target.empty())
        throw std::invalid_argument("gandi: both sample sets must be non-empty");
    GandiResult result;
    if (cfg.importance_projection) {
        auto project = [&cfg](std::vector<LabeledSample> set) {
            for (auto& s : set) s.action = cfg.importance_projection(s.action);
            return set;
        };
        const auto on_proj = project(on_target);
        const auto off_proj = project(off_target);
        result.importance = ImportanceModel::fit_network(on_proj, off_proj, cfg.importance, rng);
        result.plan = build_plan(on_proj, off_proj, result.importance);
        // restore the unprojected records so the bootstrap resamples full actions
        result.plan.source = on_target;
        result.plan.source.insert(result.plan.source.end(), off_target.begin(),
                                  off_target.end());
    } else {
        result.importance =
            ImportanceModel::fit_network(on_target, off_target, cfg.importance, rng);
        result.plan = build_plan(on_target, off_target, result.importance);
    }
    const std::size_t draws = std::max(result.plan.source.size(), cfg.bootstrap_min);
    result.bootstrapped = bootstrap(result.plan, draws, rng);
    const BoxBounds& gan_box =
        cfg.gan_action_box.lo.empty() ? cfg.importance.action_box : cfg.gan_action_box;
    result.gan = train_gan(result.bootstrapped, cfg.importance.context_box, gan_box,
                           cfg.train, rng);
    return result;
}

} // namespace gandi
