#pragma once

// Direct importance-ratio estimation: fit w_hat ~ p/q by least squares on
// on-target and off-target samples, with a tabular backend (closed form per
// bin, used by oracles) and a dense-network backend.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gandi/data.hpp"
#include "gandi/net.hpp"
#include "gandi/rng.hpp"

namespace gandi {

struct ImportanceFitConfig {
    std::size_t batch_size = 32;
    std::size_t max_epochs = 500;
    double learning_rate = 1.0; // Adadelta
    std::vector<std::size_t> hidden = {32, 32, 32};
    BoxBounds context_box; // empty for unconditional models
    BoxBounds action_box;
};

class ImportanceModel {
public:
    /// Closed-form per-bin fit: w_hat(bin) = n_p(bin) / n_q(bin); bins with no
    /// off-target mass get weight 0. Keys discretize the action only.
    static ImportanceModel fit_tabular(const std::vector<LabeledSample>& on_target,
                                       const std::vector<LabeledSample>& off_target,
                                       const BoxBounds& action_box,
                                       std::size_t bins_per_dim = 20) {
        check_inputs(on_target, off_target);
        ImportanceModel m;
        m.backend_ = Backend::tabular;
        m.action_box_ = action_box;
        m.bins_per_dim_ = bins_per_dim;
        std::map<std::vector<int>, std::pair<std::size_t, std::size_t>> counts;
        for (const auto& s : on_target) counts[m.bin_key(s.action)].first += 1;
        for (const auto& s : off_target) counts[m.bin_key(s.action)].second += 1;
        for (const auto& [key, c] : counts) {
            const double w = c.second > 0
                ? static_cast<double>(c.first) / static_cast<double>(c.second)
                : 0.0;
            m.table_[key] = w;
        }
        return m;
    }

    /// Minimize the sample objective sum_q w_hat^2 - 2 sum_p w_hat by
    /// mini-batch Adadelta on a linear-output dense net.
    static ImportanceModel fit_network(const std::vector<LabeledSample>& on_target,
                                       const std::vector<LabeledSample>& off_target,
                                       const ImportanceFitConfig& cfg, Rng& rng) {
        check_inputs(on_target, off_target);
        ImportanceModel m;
        m.backend_ = Backend::network;
        m.context_box_ = cfg.context_box;
        m.action_box_ = cfg.action_box;

        const std::size_t in_dim = cfg.context_box.dim() + cfg.action_box.dim();
        std::vector<std::size_t> sizes = {in_dim};
        sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
        sizes.push_back(1);
        std::vector<Activation> acts(cfg.hidden.size(), Activation::relu);
        acts.push_back(Activation::linear);
        m.net_ = DenseNet::random(sizes, acts, rng);

        auto features = [&](const LabeledSample& s) {
            return concat(m.context_box_.dim() ? m.context_box_.normalize(s.context)
                                               : std::vector<double>{},
                          m.action_box_.normalize(s.action));
        };
        std::vector<std::vector<double>> feat_p, feat_q;
        feat_p.reserve(on_target.size());
        feat_q.reserve(off_target.size());
        for (const auto& s : on_target) feat_p.push_back(features(s));
        for (const auto& s : off_target) feat_q.push_back(features(s));

        const double np_over_nq =
            static_cast<double>(feat_p.size()) / static_cast<double>(feat_q.size());

        auto state = OptimizerState::adadelta(*m.net_, cfg.learning_rate);
        std::vector<std::size_t> order(feat_q.size());
        std::iota(order.begin(), order.end(), 0);

        m.curve_.push_back(m.empirical_J(on_target, off_target));
        for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
            shuffle(order, rng);
            for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
                const std::size_t bq = std::min(cfg.batch_size, order.size() - start);
                Gradients grads = m.net_->zero_gradients();
                // off-target term: d/dw [w^2] = 2w, averaged over the batch
                for (std::size_t i = 0; i < bq; ++i) {
                    const auto& x = feat_q[order[start + i]];
                    auto trace = m.net_->forward_trace(x);
                    const double out = trace.outputs.back()[0];
                    const double og = 2.0 * out / static_cast<double>(bq);
                    grads.add_scaled(m.net_->backward(trace, std::vector<double>{og}), 1.0);
                }
                // on-target term: d/dw [-2w], scaled by n_p/n_q to match the
                // full-sum objective
                const std::size_t bp = std::min(cfg.batch_size, feat_p.size());
                for (std::size_t i = 0; i < bp; ++i) {
                    const auto& x = feat_p[rng.uniform_index(feat_p.size())];
                    auto trace = m.net_->forward_trace(x);
                    const double og = -2.0 * np_over_nq / static_cast<double>(bp);
                    grads.add_scaled(m.net_->backward(trace, std::vector<double>{og}), 1.0);
                }
                adadelta_step(*m.net_, grads, state);
            }
            m.curve_.push_back(m.empirical_J(on_target, off_target));
        }
        return m;
    }

    /// Importance weight, clamped at zero.
    double weight(const std::vector<double>& context, const std::vector<double>& action) const {
        double raw;
        if (backend_ == Backend::tabular) {
            auto it = table_.find(bin_key(action));
            raw = it == table_.end() ? 0.0 : it->second; // unseen bin: no target evidence
        } else if (net_) {
            const auto x = concat(context_box_.dim() ? context_box_.normalize(context)
                                                     : std::vector<double>{},
                                  action_box_.normalize(action));
            raw = net_->forward(x)[0];
        } else {
            throw std::logic_error("ImportanceModel: not fitted");
        }
        return raw > 0.0 ? raw : 0.0;
    }

    double weight(const LabeledSample& s) const { return weight(s.context, s.action); }

    /// Sample objective sum_q w^2 - 2 sum_p w at the current fit.
    double empirical_J(const std::vector<LabeledSample>& on_target,
                       const std::vector<LabeledSample>& off_target) const {
        double j = 0.0;
        for (const auto& s : off_target) {
            const double w = weight(s);
            j += w * w;
        }
        for (const auto& s : on_target) j -= 2.0 * weight(s);
        return j;
    }

    /// empirical_J after each epoch (index 0 = before training).
    const std::vector<double>& training_curve() const { return curve_; }

    bool is_tabular() const { return backend_ == Backend::tabular; }
    const DenseNet& net() const {
        if (!net_) throw std::logic_error("ImportanceModel: no network backend");
        return *net_;
    }

    void save(std::ostream& out) const {
        if (backend_ == Backend::tabular) {
            out << "tabular " << bins_per_dim_ << "\n";
            write_box(out, action_box_);
            for (const auto& [key, w] : table_) {
                for (std::size_t i = 0; i < key.size(); ++i) out << (i ? ":" : "") << key[i];
                out << "\t" << csv_double(w) << "\n";
            }
        } else {
            out << "network\n";
            write_box(out, context_box_);
            write_box(out, action_box_);
            save_model(*net_, out);
        }
    }

    static ImportanceModel load(std::istream& in) {
        ImportanceModel m;
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error("importance model: empty file");
        std::istringstream head(line);
        std::string tag;
        head >> tag;
        if (tag == "tabular") {
            m.backend_ = Backend::tabular;
            head >> m.bins_per_dim_;
            m.action_box_ = read_box(in);
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const auto tab = line.find('\t');
                if (tab == std::string::npos)
                    throw std::runtime_error("importance model: bad tabular line");
                std::vector<int> key;
                std::istringstream ks(line.substr(0, tab));
                std::string part;
                while (std::getline(ks, part, ':')) key.push_back(std::stoi(part));
                m.table_[key] = std::stod(line.substr(tab + 1));
            }
        } else if (tag == "network") {
            m.backend_ = Backend::network;
            m.context_box_ = read_box(in);
            m.action_box_ = read_box(in);
            m.net_ = load_model(in);
        } else {
            throw std::runtime_error("importance model: unknown backend tag " + tag);
        }
        return m;
    }

    static void shuffle(std::vector<std::size_t>& order, Rng& rng) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }

private:
    enum class Backend { unfitted, tabular, network };

    static void check_inputs(const std::vector<LabeledSample>& on,
                             const std::vector<LabeledSample>& off) {
        if (on.empty() || off.empty())
            throw std::invalid_argument("fit_importance: both sample sets must be non-empty");
        const std::size_t cdim = on.front().context.size();
        const std::size_t adim = on.front().action.size();
        for (const auto* set : {&on, &off})
            for (const auto& s : *set)
                if (s.context.size() != cdim || s.action.size() != adim)
                    throw std::invalid_argument("fit_importance: sample dimension mismatch");
    }

    std::vector<int> bin_key(const std::vector<double>& action) const {
        std::vector<int> key(action.size());
        for (std::size_t i = 0; i < action.size(); ++i) {
            const double range = action_box_.hi[i] - action_box_.lo[i];
            double t = range > 0.0 ? (action[i] - action_box_.lo[i]) / range : 0.0;
            int b = static_cast<int>(t * static_cast<double>(bins_per_dim_));
            if (b < 0) b = 0;
            if (b >= static_cast<int>(bins_per_dim_)) b = static_cast<int>(bins_per_dim_) - 1;
            key[i] = b;
        }
        return key;
    }

    static void write_box(std::ostream& out, const BoxBounds& box) {
        out << box.dim();
        for (double v : box.lo) out << " " << csv_double(v);
        for (double v : box.hi) out << " " << csv_double(v);
        out << "\n";
    }

    static BoxBounds read_box(std::istream& in) {
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error("importance model: missing box");
        std::istringstream ss(line);
        std::size_t d;
        if (!(ss >> d)) throw std::runtime_error("importance model: bad box");
        BoxBounds box;
        box.lo.resize(d);
        box.hi.resize(d);
        for (auto& v : box.lo) ss >> v;
        for (auto& v : box.hi) ss >> v;
        if (!ss) throw std::runtime_error("importance model: truncated box");
        return box;
    }

    Backend backend_ = Backend::unfitted;
    std::map<std::vector<int>, double> table_;
    std::size_t bins_per_dim_ = 20;
    std::optional<DenseNet> net_;
    BoxBounds context_box_;
    BoxBounds action_box_;
    std::vector<double> curve_;
};

} // namespace gandi
