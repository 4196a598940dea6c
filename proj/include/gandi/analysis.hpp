#pragma once

// Divergence computation and numerical verification of the KL bounds driven
// by importance-estimation error, plus the experiment statistics (Wilson
// intervals, checkpoint selection) and a KDE-based KL estimate for samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gandi/rng.hpp"

namespace gandi {

/// Sum p_i log(p_i / m_i). The second argument may be an unnormalized
/// measure. Conventions: 0 * log(0/x) = 0; p_i > 0 with m_i = 0 gives +inf.
inline double discrete_kl(const std::vector<double>& p, const std::vector<double>& m) {
    if (p.size() != m.size()) throw std::invalid_argument("discrete_kl: size mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (m[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / m[i]);
    }
    return kl;
}

/// Finite-support instance with true ratio w = p/q, an estimate w_hat, and
/// the error budget epsilon for the bound checks.
struct DiscreteInstance {
    std::vector<double> p;      // sums to 1
    std::vector<double> q;      // sums to 1, support(p) subset of support(q)
    std::vector<double> w_hat;  // estimated importance weights
    double epsilon = 0.0;

    std::size_t size() const { return p.size(); }

    std::vector<double> true_w() const {
        std::vector<double> w(p.size(), 0.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            if (q[i] > 0.0) w[i] = p[i] / q[i];
        return w;
    }

    /// rho = max over support(p) of q/p.
    double rho() const {
        double r = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] > 0.0) r = std::max(r, q[i] / p[i]);
        return r;
    }

    /// Exact discrete J(w_hat) = sum q_i (w_hat_i - w_i)^2.
    double discrete_J() const {
        const auto w = true_w();
        double j = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double d = w_hat[i] - w[i];
            j += q[i] * d * d;
        }
        return j;
    }

    /// Unnormalized p_G = w_hat * q from the fixed-point analysis.
    std::vector<double> pg() const {
        std::vector<double> out(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) out[i] = w_hat[i] * q[i];
        return out;
    }
};

struct BoundCheck {
    double lhs = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// KL(p || w_hat*q) <= log(1/(1 - eps*rho)), requiring w >= eps on
/// support(q), J(w_hat) <= eps^2, and eps*rho < 1. A precondition violation
/// rejects the instance instead of reporting a bound failure.
inline BoundCheck verify_theorem1(const DiscreteInstance& inst) {
    const auto w = inst.true_w();
    for (std::size_t i = 0; i < inst.size(); ++i)
        if (inst.q[i] > 0.0 && w[i] < inst.epsilon)
            throw std::invalid_argument("theorem1: precondition w >= epsilon violated");
    if (inst.discrete_J() > inst.epsilon * inst.epsilon + 1e-12)
        throw std::invalid_argument("theorem1: precondition J <= epsilon^2 violated");
    const double er = inst.epsilon * inst.rho();
    if (er >= 1.0)
        throw std::invalid_argument("theorem1: precondition epsilon*rho < 1 violated");
    BoundCheck c;
    c.lhs = discrete_kl(inst.p, inst.pg());
    c.bound = std::log(1.0 / (1.0 - er));
    c.holds = c.lhs <= c.bound + 1e-12;
    return c;
}

/// KL(p_G || p) <= (1 + eps) log(1 + eps*rho) with the unnormalized
/// p_G = w_hat*q, requiring J(w_hat) <= eps^2.
inline BoundCheck verify_theorem2(const DiscreteInstance& inst) {
    if (inst.discrete_J() > inst.epsilon * inst.epsilon + 1e-12)
        throw std::invalid_argument("theorem2: precondition J <= epsilon^2 violated");
    const auto pg = inst.pg();
    BoundCheck c;
    c.lhs = 0.0;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (pg[i] == 0.0) continue;
        if (inst.p[i] <= 0.0) {
            c.lhs = std::numeric_limits<double>::infinity();
            break;
        }
        c.lhs += pg[i] * std::log(pg[i] / inst.p[i]);
    }
    c.bound = (1.0 + inst.epsilon) * std::log(1.0 + inst.epsilon * inst.rho());
    c.holds = c.lhs <= c.bound + 1e-12;
    return c;
}

/// Per support point, maximize u*log(D) + v*log(1-D) by golden-section
/// search and compare against the closed form u/(u+v). Returns the maximum
/// deviation over the support.
inline double verify_lemma1(const DiscreteInstance& inst, const std::vector<double>& pg) {
    if (pg.size() != inst.size()) throw std::invalid_argument("lemma1: pg size mismatch");
    const auto what_q = inst.pg();
    double max_dev = 0.0;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const double u = what_q[i];
        const double v = pg[i];
        if (u == 0.0 && v == 0.0) continue;
        const double closed = u / (u + v);
        auto objective = [&](double d) {
            double val = 0.0;
            if (u > 0.0) val += u * std::log(d);
            if (v > 0.0) val += v * std::log(1.0 - d);
            return val;
        };
        // golden-section maximization on (0, 1)
        const double gr = 0.6180339887498948482;
        double lo = 1e-9, hi = 1.0 - 1e-9;
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = objective(x1), f2 = objective(x2);
        for (int it = 0; it < 200; ++it) {
            if (f1 < f2) {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + gr * (hi - lo); f2 = objective(x2);
            } else {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - gr * (hi - lo); f1 = objective(x1);
            }
        }
        const double numeric = (lo + hi) / 2.0;
        max_dev = std::max(max_dev, std::abs(numeric - closed));
    }
    return max_dev;
}

/// Random precondition-satisfying instance: Dirichlet-ish p and q on a common
/// support of size 2..16, w_hat = w + scaled perturbation with
/// J(w_hat) <= eps^2 and eps*rho < 1.
inline DiscreteInstance random_discrete_instance(Rng& rng, bool exact_weights = false) {
    const std::size_t n = 2 + rng.uniform_index(15);
    DiscreteInstance inst;
    inst.p.resize(n);
    inst.q.resize(n);
    auto dirichlet = [&](std::vector<double>& v) {
        double total = 0.0;
        for (auto& x : v) {
            x = -std::log(1.0 - rng.uniform()); // Exp(1) => uniform Dirichlet
            total += x;
        }
        for (auto& x : v) x /= total;
    };
    dirichlet(inst.p);
    dirichlet(inst.q);
    const auto w = inst.true_w();
    double min_w = std::numeric_limits<double>::infinity();
    for (double wi : w) min_w = std::min(min_w, wi);
    if (exact_weights) {
        inst.w_hat = w;
        inst.epsilon = 0.0;
        return inst;
    }
    inst.epsilon = rng.uniform(0.1, 0.9) * min_w; // also forces eps*rho < 1
    std::vector<double> delta(n);
    for (auto& d : delta) d = rng.uniform(-1.0, 1.0);
    // scale so J = eta * eps^2 and every w_hat stays non-negative
    double j_raw = 0.0;
    for (std::size_t i = 0; i < n; ++i) j_raw += inst.q[i] * delta[i] * delta[i];
    double scale = j_raw > 0.0 ? std::sqrt(rng.uniform(0.0, 1.0)) * inst.epsilon / std::sqrt(j_raw)
                               : 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (delta[i] < 0.0) scale = std::min(scale, 0.999 * w[i] / -delta[i]);
    inst.w_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) inst.w_hat[i] = w[i] + scale * delta[i];
    return inst;
}

// ---------------------------------------------------------------------------
// Experiment statistics

struct SuccessStats {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Wilson score interval at 95%.
inline SuccessStats success_stats(const std::vector<bool>& outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("success_stats: empty outcome list");
    SuccessStats st;
    st.trials = outcomes.size();
    for (bool b : outcomes) st.successes += b ? 1 : 0;
    const double n = static_cast<double>(st.trials);
    const double phat = static_cast<double>(st.successes) / n;
    st.rate = phat;
    const double z = 1.959963984540054;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    st.ci_low = std::max(0.0, center - half);
    st.ci_high = std::min(1.0, center + half);
    return st;
}

/// Evaluate each checkpoint on the same validation set; pick the one with the
/// most successes, ties broken toward the earliest epoch. `evaluate` is
/// called as evaluate(checkpoint_value, validation_index) -> bool.
template <class Checkpoint, class Evaluate>
std::size_t select_checkpoint(const std::vector<std::pair<std::size_t, Checkpoint>>& checkpoints,
                              std::size_t n_validation, Evaluate evaluate) {
    if (checkpoints.empty()) throw std::invalid_argument("select_checkpoint: no checkpoints");
    std::size_t best = 0, best_successes = 0;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        std::size_t successes = 0;
        for (std::size_t i = 0; i < n_validation; ++i)
            if (evaluate(checkpoints[c].second, i)) ++successes;
        if (c == 0 || successes > best_successes) {
            best = c;
            best_successes = successes;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// KDE-based KL estimate between two 2D sample clouds.

/// Gaussian-kernel density estimates on a shared 60x60 grid (data bounding
/// box padded 10%), normalized, then discrete KL. bandwidth <= 0 selects
/// Scott's rule per dimension.
inline double kde_kl_estimate(const std::vector<std::array<double, 2>>& samples_a,
                              const std::vector<std::array<double, 2>>& samples_b,
                              double bandwidth = 0.0, std::size_t grid = 60) {
    if (samples_a.size() < 100 || samples_b.size() < 100)
        throw std::invalid_argument("kde_kl_estimate: need at least 100 samples per set");
    double xmin = samples_a[0][0], xmax = xmin, ymin = samples_a[0][1], ymax = ymin;
    for (const auto* set : {&samples_a, &samples_b})
        for (const auto& s : *set) {
            xmin = std::min(xmin, s[0]);
            xmax = std::max(xmax, s[0]);
            ymin = std::min(ymin, s[1]);
            ymax = std::max(ymax, s[1]);
        }
    const double padx = 0.1 * (xmax - xmin), pady = 0.1 * (ymax - ymin);
    xmin -= padx; xmax += padx; ymin -= pady; ymax += pady;
    if (xmax <= xmin || ymax <= ymin)
        throw std::invalid_argument("kde_kl_estimate: degenerate samples");

    auto scott = [](const std::vector<std::array<double, 2>>& s, int dim) {
        double mean = 0.0;
        for (const auto& x : s) mean += x[static_cast<std::size_t>(dim)];
        mean /= static_cast<double>(s.size());
        double var = 0.0;
        for (const auto& x : s) {
            const double d = x[static_cast<std::size_t>(dim)] - mean;
            var += d * d;
        }
        var /= static_cast<double>(s.size() - 1);
        // d = 2: n^(-1/(d+4)) = n^(-1/6)
        return std::sqrt(var) * std::pow(static_cast<double>(s.size()), -1.0 / 6.0);
    };

    auto density_grid = [&](const std::vector<std::array<double, 2>>& s) {
        const double hx = bandwidth > 0.0 ? bandwidth : scott(s, 0);
        const double hy = bandwidth > 0.0 ? bandwidth : scott(s, 1);
        if (hx <= 0.0 || hy <= 0.0)
            throw std::invalid_argument("kde_kl_estimate: degenerate samples (zero variance)");
        std::vector<double> g(grid * grid, 0.0);
        double total = 0.0;
        for (std::size_t iy = 0; iy < grid; ++iy) {
            const double y = ymin + (ymax - ymin) * (static_cast<double>(iy) + 0.5) /
                                        static_cast<double>(grid);
            for (std::size_t ix = 0; ix < grid; ++ix) {
                const double x = xmin + (xmax - xmin) * (static_cast<double>(ix) + 0.5) /
                                            static_cast<double>(grid);
                double acc = 0.0;
                for (const auto& pt : s) {
                    const double dx = (x - pt[0]) / hx;
                    const double dy = (y - pt[1]) / hy;
                    acc += std::exp(-0.5 * (dx * dx + dy * dy));
                }
                acc = std::max(acc, 1e-12);
                g[iy * grid + ix] = acc;
                total += acc;
            }
        }
        for (auto& v : g) v /= total;
        return g;
    };

    return discrete_kl(density_grid(samples_a), density_grid(samples_b));
}

} // namespace gandi
