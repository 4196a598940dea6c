#pragma once

// Minimal dense feed-forward network with exact analytic gradients,
// Adam / Adadelta optimizers, and a versioned text serialization.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gandi/rng.hpp"

namespace gandi {

enum class Activation { relu, sigmoid, tanh, linear };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
        case Activation::linear: return "linear";
    }
    throw std::logic_error("bad activation tag");
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "tanh") return Activation::tanh;
    if (s == "linear") return Activation::linear;
    throw std::runtime_error("unknown activation tag: " + s);
}

/// Row-major matrix, rows = layer outputs.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Gradients {
    std::vector<Matrix> weight_grads;
    std::vector<std::vector<double>> bias_grads;
    std::vector<double> input_grad;

    void add_scaled(const Gradients& other, double scale) {
        for (std::size_t l = 0; l < weight_grads.size(); ++l) {
            for (std::size_t i = 0; i < weight_grads[l].data.size(); ++i)
                weight_grads[l].data[i] += scale * other.weight_grads[l].data[i];
            for (std::size_t i = 0; i < bias_grads[l].size(); ++i)
                bias_grads[l][i] += scale * other.bias_grads[l][i];
        }
    }
};

/// Per-layer intermediate values kept for the backward pass.
struct ForwardTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre_activations;
    std::vector<std::vector<double>> outputs; // post-activation per layer
};

// Sigmoid inputs clamped for numerical safety; output strictly in (0,1).
inline double sigmoid_clamped(double x) {
    if (x > 30.0) x = 30.0;
    if (x < -30.0) x = -30.0;
    return 1.0 / (1.0 + std::exp(-x));
}

class DenseNet {
public:
    DenseNet() = default;

    DenseNet(std::vector<std::size_t> layer_sizes, std::vector<Activation> activations)
        : layer_sizes_(std::move(layer_sizes)), activations_(std::move(activations)) {
        if (layer_sizes_.size() < 2)
            throw std::invalid_argument("DenseNet needs at least input and output sizes");
        if (activations_.size() != layer_sizes_.size() - 1)
            throw std::invalid_argument("one activation per layer transition required");
        for (auto s : layer_sizes_)
            if (s == 0) throw std::invalid_argument("layer sizes must be positive");
        for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
            weights_.emplace_back(layer_sizes_[l + 1], layer_sizes_[l]);
            biases_.emplace_back(layer_sizes_[l + 1], 0.0);
        }
    }

    /// Glorot-uniform initialization: U(+-sqrt(6/(fan_in+fan_out))).
    static DenseNet random(std::vector<std::size_t> layer_sizes,
                           std::vector<Activation> activations, Rng& rng) {
        DenseNet net(std::move(layer_sizes), std::move(activations));
        for (std::size_t l = 0; l < net.weights_.size(); ++l) {
            const double fan_in = static_cast<double>(net.weights_[l].cols);
            const double fan_out = static_cast<double>(net.weights_[l].rows);
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            for (auto& w : net.weights_[l].data) w = rng.uniform(-limit, limit);
        }
        return net;
    }

    std::size_t input_dim() const { return layer_sizes_.front(); }
    std::size_t output_dim() const { return layer_sizes_.back(); }
    std::size_t num_layers() const { return weights_.size(); }
    const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
    const std::vector<Activation>& activations() const { return activations_; }
    std::vector<Matrix>& weights() { return weights_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    std::vector<std::vector<double>>& biases() { return biases_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    std::vector<double> forward(std::span<const double> input) const {
        return forward_trace(input).outputs.back();
    }

    ForwardTrace forward_trace(std::span<const double> input) const {
        if (input.size() != input_dim())
            throw std::invalid_argument("forward: input length " + std::to_string(input.size()) +
                                        " != first layer size " + std::to_string(input_dim()));
        ForwardTrace trace;
        trace.input.assign(input.begin(), input.end());
        const std::vector<double>* cur = &trace.input;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            const Matrix& W = weights_[l];
            std::vector<double> z(W.rows);
            for (std::size_t r = 0; r < W.rows; ++r) {
                double acc = biases_[l][r];
                const double* wrow = &W.data[r * W.cols];
                for (std::size_t c = 0; c < W.cols; ++c) acc += wrow[c] * (*cur)[c];
                z[r] = acc;
            }
            std::vector<double> y(W.rows);
            for (std::size_t r = 0; r < W.rows; ++r) y[r] = apply(activations_[l], z[r]);
            trace.pre_activations.push_back(std::move(z));
            trace.outputs.push_back(std::move(y));
            cur = &trace.outputs.back();
        }
        return trace;
    }

    /// Exact backpropagation. output_gradient is dL/d(output).
    Gradients backward(const ForwardTrace& trace, std::span<const double> output_gradient) const {
        if (output_gradient.size() != output_dim())
            throw std::invalid_argument("backward: output gradient shape mismatch");
        Gradients g = zero_gradients();
        std::vector<double> delta(output_gradient.begin(), output_gradient.end());
        for (std::size_t li = weights_.size(); li-- > 0;) {
            const Matrix& W = weights_[li];
            // through the activation
            for (std::size_t r = 0; r < W.rows; ++r)
                delta[r] *= derivative(activations_[li], trace.pre_activations[li][r],
                                       trace.outputs[li][r]);
            const std::vector<double>& prev =
                (li == 0) ? trace.input : trace.outputs[li - 1];
            for (std::size_t r = 0; r < W.rows; ++r) {
                g.bias_grads[li][r] = delta[r];
                double* grow = &g.weight_grads[li].data[r * W.cols];
                for (std::size_t c = 0; c < W.cols; ++c) grow[c] = delta[r] * prev[c];
            }
            std::vector<double> next_delta(W.cols, 0.0);
            for (std::size_t r = 0; r < W.rows; ++r) {
                const double* wrow = &W.data[r * W.cols];
                for (std::size_t c = 0; c < W.cols; ++c) next_delta[c] += wrow[c] * delta[r];
            }
            delta = std::move(next_delta);
        }
        g.input_grad = std::move(delta);
        return g;
    }

    Gradients zero_gradients() const {
        Gradients g;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            g.weight_grads.emplace_back(weights_[l].rows, weights_[l].cols);
            g.bias_grads.emplace_back(biases_[l].size(), 0.0);
        }
        g.input_grad.assign(input_dim(), 0.0);
        return g;
    }

    bool all_finite() const {
        for (const auto& W : weights_)
            for (double w : W.data)
                if (!std::isfinite(w)) return false;
        for (const auto& b : biases_)
            for (double v : b)
                if (!std::isfinite(v)) return false;
        return true;
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& W : weights_) n += W.data.size();
        for (const auto& b : biases_) n += b.size();
        return n;
    }

private:
    static double apply(Activation a, double x) {
        switch (a) {
            case Activation::relu: return x > 0.0 ? x : 0.0;
            case Activation::sigmoid: return sigmoid_clamped(x);
            case Activation::tanh: return std::tanh(x);
            case Activation::linear: return x;
        }
        return x;
    }

    static double derivative(Activation a, double pre, double post) {
        switch (a) {
            case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
            case Activation::sigmoid: return post * (1.0 - post);
            case Activation::tanh: return 1.0 - post * post;
            case Activation::linear: return 1.0;
        }
        return 1.0;
    }

    std::vector<std::size_t> layer_sizes_;
    std::vector<Activation> activations_;
    std::vector<Matrix> weights_;
    std::vector<std::vector<double>> biases_;
};

// ---------------------------------------------------------------------------
// Optimizers

struct OptimizerState {
    enum class Kind { adam, adadelta };

    Kind kind = Kind::adam;
    double learning_rate = 0.001;
    double beta1 = 0.9;     // Adam
    double beta2 = 0.999;   // Adam
    double rho = 0.95;      // Adadelta
    double epsilon = 1e-8;
    std::size_t step = 0;
    // acc1: first-moment / squared-gradient accumulator, acc2: second-moment /
    // squared-update accumulator, shapes mirroring the weights.
    std::vector<Matrix> acc1_w, acc2_w;
    std::vector<std::vector<double>> acc1_b, acc2_b;

    static OptimizerState adam(const DenseNet& net, double lr = 0.001) {
        OptimizerState st;
        st.kind = Kind::adam;
        st.learning_rate = lr;
        st.epsilon = 1e-8;
        st.init_buffers(net);
        return st;
    }

    static OptimizerState adadelta(const DenseNet& net, double lr = 1.0) {
        OptimizerState st;
        st.kind = Kind::adadelta;
        st.learning_rate = lr;
        st.epsilon = 1e-6;
        st.init_buffers(net);
        return st;
    }

    void init_buffers(const DenseNet& net) {
        acc1_w.clear(); acc2_w.clear(); acc1_b.clear(); acc2_b.clear();
        for (const auto& W : net.weights()) {
            acc1_w.emplace_back(W.rows, W.cols);
            acc2_w.emplace_back(W.rows, W.cols);
        }
        for (const auto& b : net.biases()) {
            acc1_b.emplace_back(b.size(), 0.0);
            acc2_b.emplace_back(b.size(), 0.0);
        }
    }
};

namespace detail {

inline void check_grad_shapes(const DenseNet& net, const Gradients& grads) {
    if (grads.weight_grads.size() != net.num_layers())
        throw std::invalid_argument("gradient layer count mismatch");
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        if (grads.weight_grads[l].rows != net.weights()[l].rows ||
            grads.weight_grads[l].cols != net.weights()[l].cols ||
            grads.bias_grads[l].size() != net.biases()[l].size())
            throw std::invalid_argument("gradient shape mismatch at layer " + std::to_string(l));
    }
}

template <typename Update>
void for_each_param(DenseNet& net, const Gradients& grads, OptimizerState& st, Update update) {
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        auto& W = net.weights()[l];
        for (std::size_t i = 0; i < W.data.size(); ++i)
            update(W.data[i], grads.weight_grads[l].data[i], st.acc1_w[l].data[i],
                   st.acc2_w[l].data[i]);
        auto& b = net.biases()[l];
        for (std::size_t i = 0; i < b.size(); ++i)
            update(b[i], grads.bias_grads[l][i], st.acc1_b[l][i], st.acc2_b[l][i]);
    }
}

} // namespace detail

inline void adam_step(DenseNet& net, const Gradients& grads, OptimizerState& st) {
    if (st.kind != OptimizerState::Kind::adam)
        throw std::invalid_argument("adam_step: optimizer state is not adam");
    detail::check_grad_shapes(net, grads);
    st.step += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    detail::for_each_param(net, grads, st,
        [&](double& w, double g, double& m, double& v) {
            m = st.beta1 * m + (1.0 - st.beta1) * g;
            v = st.beta2 * v + (1.0 - st.beta2) * g * g;
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            w -= st.learning_rate * mhat / (std::sqrt(vhat) + st.epsilon);
        });
}

inline void adadelta_step(DenseNet& net, const Gradients& grads, OptimizerState& st) {
    if (st.kind != OptimizerState::Kind::adadelta)
        throw std::invalid_argument("adadelta_step: optimizer state is not adadelta");
    detail::check_grad_shapes(net, grads);
    st.step += 1;
    detail::for_each_param(net, grads, st,
        [&](double& w, double g, double& eg2, double& edx2) {
            eg2 = st.rho * eg2 + (1.0 - st.rho) * g * g;
            const double dx = -std::sqrt(edx2 + st.epsilon) / std::sqrt(eg2 + st.epsilon) * g;
            edx2 = st.rho * edx2 + (1.0 - st.rho) * dx * dx;
            w += st.learning_rate * dx;
        });
}

// ---------------------------------------------------------------------------
// Serialization: versioned UTF-8 text, >= 17 significant digits per value so
// round-trips are bit-exact.

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline void save_model(const DenseNet& net, std::ostream& out) {
    out << "GANDI-NET v1\n";
    for (std::size_t i = 0; i < net.layer_sizes().size(); ++i)
        out << (i ? " " : "") << net.layer_sizes()[i];
    out << "\n";
    for (std::size_t i = 0; i < net.activations().size(); ++i)
        out << (i ? " " : "") << to_string(net.activations()[i]);
    out << "\n";
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const Matrix& W = net.weights()[l];
        for (std::size_t r = 0; r < W.rows; ++r) {
            for (std::size_t c = 0; c < W.cols; ++c)
                out << (c ? " " : "") << detail::format_double(W.at(r, c));
            out << "\n";
        }
        const auto& b = net.biases()[l];
        for (std::size_t i = 0; i < b.size(); ++i)
            out << (i ? " " : "") << detail::format_double(b[i]);
        out << "\n";
    }
}

inline void save_model(const DenseNet& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_model(net, out);
}

inline DenseNet load_model(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header != "GANDI-NET v1")
        throw std::runtime_error("model file version error: expected 'GANDI-NET v1'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("model file truncated: missing layer sizes");
    std::vector<std::size_t> sizes;
    {
        std::istringstream ss(line);
        std::size_t v;
        while (ss >> v) sizes.push_back(v);
    }
    if (sizes.size() < 2) throw std::runtime_error("model file dimension inconsistency: bad layer sizes");
    if (!std::getline(in, line)) throw std::runtime_error("model file truncated: missing activations");
    std::vector<Activation> acts;
    {
        std::istringstream ss(line);
        std::string tag;
        while (ss >> tag) acts.push_back(activation_from_string(tag));
    }
    if (acts.size() != sizes.size() - 1)
        throw std::runtime_error("model file dimension inconsistency: activation count");
    DenseNet net(sizes, acts);
    auto read_row = [&](std::vector<double>& dst, std::size_t n, const char* what) {
        if (!std::getline(in, line))
            throw std::runtime_error(std::string("model file truncated: missing ") + what);
        std::istringstream ss(line);
        dst.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            if (!(ss >> dst[i]))
                throw std::runtime_error(std::string("model file dimension inconsistency in ") + what);
        double extra;
        if (ss >> extra)
            throw std::runtime_error(std::string("model file dimension inconsistency in ") + what);
    };
    std::vector<double> row;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix& W = net.weights()[l];
        for (std::size_t r = 0; r < W.rows; ++r) {
            read_row(row, W.cols, "weight row");
            for (std::size_t c = 0; c < W.cols; ++c) W.at(r, c) = row[c];
        }
        read_row(row, net.biases()[l].size(), "bias vector");
        net.biases()[l] = row;
    }
    // trailing non-blank content means the declared sizes do not match the data
    while (std::getline(in, line)) {
        if (!line.empty())
            throw std::runtime_error("model file dimension inconsistency: trailing data");
    }
    return net;
}

inline DenseNet load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load_model(in);
}

} // namespace gandi
